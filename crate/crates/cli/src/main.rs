//! `dropcase`: worst-case control and estimation under constrained packet
//! dropouts, from the command line.
//!
//! Exit status: 0 on success, 1 on bad input, 2 when a study's per-sample
//! failures exceed its threshold.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dropcase_core::matrix_io::{vector_from_list, MatrixJson};
use dropcase_core::study::{run_study_with, StudyConfig};
use dropcase_core::system::SystemJson;
use dropcase_core::worst_case::{csv_summary_header, csv_summary_row, DEFAULT_EXHAUSTIVE_CAP};
use dropcase_core::{
    k_constraint_automaton, minimal_filter, minimal_signals_bfs, polytope_reachable, worst_case,
    Automaton, Constraint, LqrWeights, Mode, Polytope, Problem, ProblemId, RankTolerance,
    SignalSet, SolverOptions, SwitchedLinearSystem, WorstCaseOptions, WorstCaseReport,
};
use nalgebra::DVector;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "dropcase", version, about = "Worst-case performance under constrained packet dropouts")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutFormat::Json, global = true)]
    out: OutFormat,
    /// Relative singular-value threshold for rank decisions (default:
    /// max(rows, cols)·eps).
    #[arg(long = "tol-rank", global = true)]
    tol_rank: Option<f64>,
    /// Slack on feasibility predicates.
    #[arg(long = "tol-feas", global = true, default_value_t = 1e-9)]
    tol_feas: f64,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Largest signal set exhaustive enumeration may build.
    #[arg(long = "exhaustive-cap", global = true, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    exhaustive_cap: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bfs,
    Filter,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Minimal,
    Exhaustive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Minimal => Mode::Minimal,
            ModeArg::Exhaustive => Mode::Exhaustive,
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConstraintArgs {
    /// At most k consecutive dropouts.
    #[arg(long)]
    k: Option<usize>,
    /// Constraint automaton (JSON).
    #[arg(long)]
    automaton: Option<PathBuf>,
}

#[derive(Args)]
struct Search {
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Horizon length.
    #[arg(long = "T")]
    horizon: usize,
    /// System file: {"A": .., "B": .., "C": ..}.
    #[arg(long)]
    system: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Minimal)]
    mode: ModeArg,
}

#[derive(Subcommand)]
enum Command {
    /// List the admissible signals of a horizon.
    Admissible {
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[arg(long = "T")]
        horizon: usize,
    },
    /// List the minimal admissible signals of a horizon.
    Minimal {
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[arg(long = "T")]
        horizon: usize,
        /// `bfs` needs --k; `filter` enumerates and filters.
        #[arg(long, value_enum, default_value_t = Method::Bfs)]
        method: Method,
    },
    /// Worst estimation time (problem I).
    EstimateTime {
        #[command(flatten)]
        search: Search,
    },
    /// Worst time to steer x0 to the origin with |u| <= 1 (problem II).
    ControlTime {
        #[command(flatten)]
        search: Search,
        /// Comma-separated initial state (default: all ones).
        #[arg(long)]
        x0: Option<String>,
    },
    /// Worst minimum 1-norm input reaching x_f (problem III).
    Fuel {
        #[command(flatten)]
        search: Search,
        /// Comma-separated target (default: all ones).
        #[arg(long)]
        xf: Option<String>,
        /// Optional bound on every input entry.
        #[arg(long = "input-bound")]
        input_bound: Option<f64>,
    },
    /// Worst minimum 2-norm input reaching x_f (problem III).
    Energy {
        #[command(flatten)]
        search: Search,
        #[arg(long)]
        xf: Option<String>,
    },
    /// Worst minimum of gamma1·|u|_1 + gamma2·|u|_2 reaching x_f (problem III).
    FuelEnergy {
        #[command(flatten)]
        search: Search,
        #[arg(long)]
        xf: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma2: f64,
    },
    /// Whether a polytope lies in every unit-energy reachable set (problem IV).
    Reach {
        #[command(flatten)]
        search: Search,
        /// Polytope file: {"vertices": [[..], ..]}.
        #[arg(long)]
        polytope: PathBuf,
    },
    /// Worst optimal LQR cost (problem V).
    LqrMaxmin {
        #[command(flatten)]
        search: Search,
        #[arg(long)]
        x0: Option<String>,
        /// Weights file: {"Q": .., "R": .., "Qf": ..} (default: identities).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Worst cost of the dropout-free LQR gains (problem VI).
    LqrFixed {
        #[command(flatten)]
        search: Search,
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Randomized degradation study.
    Study(StudyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// Study config (JSON); flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemId>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    inputs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Include every sample's full worst-case report in JSON output.
    #[arg(long)]
    reports: bool,
}

/// Failure with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<dropcase_core::Error> for Failure {
    fn from(e: dropcase_core::Error) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Parses a JSON file, prefixing errors (which carry line and column) with
/// the path.
fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: dropcase_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<SwitchedLinearSystem, Failure> {
    let raw: SystemJson = parse_json(path)?;
    in_file(path, raw.to_system())
}

fn load_automaton(path: &Path) -> Result<Automaton, Failure> {
    in_file(path, Automaton::from_json(&read(path)?))
}

fn constraint(args: &ConstraintArgs) -> Result<Constraint, Failure> {
    match (&args.k, &args.automaton) {
        (Some(k), None) => Ok(Constraint::MaxConsecutiveDropouts(*k)),
        (None, Some(path)) => Ok(Constraint::Automaton(load_automaton(path)?)),
        _ => Err(Failure::input("give exactly one of --k and --automaton")),
    }
}

fn state_vector(text: Option<&str>, n: usize, flag: &str) -> Result<DVector<f64>, Failure> {
    let v = match text {
        None => return Ok(DVector::from_element(n, 1.0)),
        Some(t) => vector_from_list(t).map_err(|e| Failure::input(format!("{flag}: {e}")))?,
    };
    if v.len() != n {
        return Err(Failure::input(format!("{flag} has {} entries, the system has {n} states", v.len())));
    }
    Ok(v)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsJson {
    #[serde(rename = "Q")]
    q: MatrixJson,
    #[serde(rename = "R")]
    r: MatrixJson,
    #[serde(rename = "Qf")]
    qf: MatrixJson,
}

fn weights(path: Option<&Path>, sys: &SwitchedLinearSystem, horizon: usize) -> Result<LqrWeights, Failure> {
    match path {
        None => Ok(LqrWeights::identity(sys.n(), sys.m(), horizon)?),
        Some(p) => {
            let raw: WeightsJson = parse_json(p)?;
            let q = in_file(p, raw.q.to_matrix())?;
            let r = in_file(p, raw.r.to_matrix())?;
            let qf = in_file(p, raw.qf.to_matrix())?;
            in_file(p, LqrWeights::new(q, r, qf, horizon))
        }
    }
}

struct Context {
    global: Global,
}

impl Context {
    fn options(&self, mode: ModeArg) -> WorstCaseOptions {
        WorstCaseOptions {
            mode: mode.into(),
            solver: SolverOptions {
                rank_tol: self.global.tol_rank.map_or(RankTolerance::Default, RankTolerance::Relative),
                feas_tol: self.global.tol_feas,
                ..SolverOptions::default()
            },
            exhaustive_cap: self.global.exhaustive_cap,
        }
    }

    fn write_signals(&self, out: &mut impl Write, set: &SignalSet) -> Result<(), Failure> {
        match self.global.out {
            OutFormat::Json => {
                let signals: Vec<String> = set.iter().map(|s| s.to_string()).collect();
                let doc = serde_json::json!({
                    "horizon": set.signal_length(),
                    "count": signals.len(),
                    "signals": signals,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            }
            OutFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["signal"])?;
                for s in set.iter() {
                    w.write_record([s.to_string()])?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    fn write_report(&self, out: &mut impl Write, report: &WorstCaseReport) -> Result<(), Failure> {
        match self.global.out {
            OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(report)?)?,
            OutFormat::Csv => {
                writeln!(out, "{}", csv_summary_header())?;
                writeln!(out, "{}", csv_summary_row(report))?;
            }
        }
        Ok(())
    }

    fn search(&self, out: &mut impl Write, search: &Search, problem: impl FnOnce(&SwitchedLinearSystem) -> Result<Problem, Failure>) -> Result<(), Failure> {
        let sys = load_system(&search.system)?;
        let problem = problem(&sys)?;
        let report = worst_case(&sys, &constraint(&search.constraint)?, search.horizon, &problem, &self.options(search.mode))?;
        self.write_report(out, &report)
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    if let Some(threads) = cli.global.parallel {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::input(format!("--parallel: {e}")))?;
    }
    let ctx = Context { global: cli.global };
    match cli.command {
        Command::Admissible { constraint: c, horizon } => {
            let set = constraint(&c)?.automaton().enumerate_admissible_capped(horizon, ctx.global.exhaustive_cap)?;
            ctx.write_signals(out, &set)
        }
        Command::Minimal {
            constraint: c,
            horizon,
            method,
        } => {
            let set = match (method, constraint(&c)?) {
                (Method::Bfs, Constraint::MaxConsecutiveDropouts(k)) => minimal_signals_bfs(k, horizon),
                (Method::Bfs, Constraint::Automaton(_)) => {
                    return Err(Failure::input("--method bfs needs --k; use --method filter for a custom automaton"));
                }
                (Method::Filter, Constraint::MaxConsecutiveDropouts(k)) => minimal_filter(
                    &k_constraint_automaton(k).enumerate_admissible_capped(horizon, ctx.global.exhaustive_cap)?,
                ),
                (Method::Filter, Constraint::Automaton(a)) => {
                    minimal_filter(&a.enumerate_admissible_capped(horizon, ctx.global.exhaustive_cap)?)
                }
            };
            ctx.write_signals(out, &set)
        }
        Command::EstimateTime { search } => ctx.search(out, &search, |_| Ok(Problem::EstimationTime)),
        Command::ControlTime { search, x0 } => ctx.search(out, &search, |sys| {
            Ok(Problem::ControlTime {
                x0: state_vector(x0.as_deref(), sys.n(), "--x0")?,
            })
        }),
        Command::Fuel {
            search,
            xf,
            input_bound,
        } => ctx.search(out, &search, |sys| {
            Ok(Problem::Fuel {
                target: state_vector(xf.as_deref(), sys.n(), "--xf")?,
                input_bound,
            })
        }),
        Command::Energy { search, xf } => ctx.search(out, &search, |sys| {
            Ok(Problem::Energy {
                target: state_vector(xf.as_deref(), sys.n(), "--xf")?,
            })
        }),
        Command::FuelEnergy {
            search,
            xf,
            gamma1,
            gamma2,
        } => ctx.search(out, &search, |sys| {
            Ok(Problem::FuelEnergy {
                target: state_vector(xf.as_deref(), sys.n(), "--xf")?,
                gamma1,
                gamma2,
            })
        }),
        Command::LqrMaxmin { search, x0, weights: w } => {
            let horizon = search.horizon;
            ctx.search(out, &search, |sys| {
                Ok(Problem::MaxMinLqr {
                    weights: weights(w.as_deref(), sys, horizon)?,
                    x0: state_vector(x0.as_deref(), sys.n(), "--x0")?,
                })
            })
        }
        Command::LqrFixed { search, x0, weights: w } => {
            let horizon = search.horizon;
            ctx.search(out, &search, |sys| {
                Ok(Problem::FixedInputLqr {
                    weights: weights(w.as_deref(), sys, horizon)?,
                    x0: state_vector(x0.as_deref(), sys.n(), "--x0")?,
                })
            })
        }
        Command::Reach { search, polytope } => {
            let sys = load_system(&search.system)?;
            let poly = in_file(&polytope, Polytope::from_json(&read(&polytope)?))?;
            let report = polytope_reachable(
                &sys,
                &constraint(&search.constraint)?,
                search.horizon,
                &poly,
                &ctx.options(search.mode),
            )?;
            match ctx.global.out {
                OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
                OutFormat::Csv => {
                    writeln!(out, "reachable,worst_vertex,{}", csv_summary_header())?;
                    writeln!(
                        out,
                        "{},{},{}",
                        report.reachable,
                        report.worst_vertex.map(|v| v.to_string()).unwrap_or_default(),
                        csv_summary_row(&report.report)
                    )?;
                }
            }
            Ok(())
        }
        Command::Study(args) => study(&ctx, out, args),
    }
}

fn study(ctx: &Context, out: &mut impl Write, args: StudyArgs) -> Result<(), Failure> {
    let mut cfg: StudyConfig = match &args.config {
        Some(path) => parse_json(path)?,
        None => StudyConfig::default(),
    };
    let g = &ctx.global;
    // flags override the file
    if let Some(v) = args.problem {
        cfg.problem = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.states {
        cfg.states = v;
    }
    if let Some(v) = args.inputs {
        cfg.inputs = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.mode {
        cfg.mode = v.into();
    }
    if let Some(v) = args.horizon {
        cfg.horizon = v;
    }
    if g.tol_rank.is_some() {
        cfg.tol_rank = g.tol_rank;
    }
    if args.config.is_none() || g.tol_feas != 1e-9 {
        cfg.tol_feas = g.tol_feas;
    }
    if args.config.is_none() || g.exhaustive_cap != DEFAULT_EXHAUSTIVE_CAP {
        cfg.exhaustive_cap = g.exhaustive_cap;
    }

    let result = run_study_with(&cfg, args.reports)?;
    for row in &result.rows {
        if let Some(detail) = &row.detail {
            eprintln!("sample {} ({}): {:?}: {detail}", row.sample_id, row.method, row.status);
        }
    }
    match g.out {
        OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&result)?)?,
        OutFormat::Csv => write!(out, "{}", result.to_csv())?,
    }
    if result.exceeds_failure_threshold() {
        return Err(Failure {
            code: 2,
            message: format!(
                "{} of {} samples failed (threshold {})",
                result.failed_samples,
                result.rows.len(),
                cfg.max_failure_fraction
            ),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
