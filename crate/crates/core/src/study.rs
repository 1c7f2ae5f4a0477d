//! Randomized validation study: draw systems, compare the worst case under
//! dropouts against the dropout-free value, and time the two minimal-signal
//! generators.
//!
//! Sample `i` draws from `ChaCha20Rng::seed_from_u64(seed)` switched to
//! stream `i`, so every sample is reproducible on its own and parallel runs
//! match sequential ones. Samples cycle through the three `A` generators in
//! order `orthogonal_diag, gaussian, gaussian_x10`.

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::{k_constraint_automaton, minimal_filter, minimal_signals_bfs, Signal};
use crate::error::{Error, Result};
use crate::lqr::LqrWeights;
use crate::solvers::SolverOptions;
use crate::system::{RankTolerance, SwitchedLinearSystem};
use crate::worst_case::{
    evaluate_signal, worst_case, Constraint, Mode, Problem, ProblemId, Value, WorstCaseOptions,
    WorstCaseReport,
};

pub const GENERATOR_NAME: &str = "ChaCha20Rng(seed_from_u64(seed), stream = sample_id)";

/// Nominal values at or below this are treated as degenerate.
pub const NOMINAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomMethod {
    /// `A = VᵀDV`, `D` diagonal with nonzero integers in `[-25, 25]` scaled
    /// by 0.1, `V` Haar-orthogonal.
    OrthogonalDiag,
    /// Standard normal entries.
    Gaussian,
    /// Standard normal entries scaled by 10.
    GaussianX10,
}

impl RandomMethod {
    pub const ALL: [RandomMethod; 3] = [
        RandomMethod::OrthogonalDiag,
        RandomMethod::Gaussian,
        RandomMethod::GaussianX10,
    ];

    pub fn for_sample(sample_id: usize) -> Self {
        Self::ALL[sample_id % 3]
    }
}

impl fmt::Display for RandomMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RandomMethod::OrthogonalDiag => "orthogonal_diag",
            RandomMethod::Gaussian => "gaussian",
            RandomMethod::GaussianX10 => "gaussian_x10",
        })
    }
}

pub fn sample_rng(seed: u64, sample_id: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(sample_id as u64);
    rng
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_matrix(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn random_state_matrix<R: Rng>(n: usize, method: RandomMethod, rng: &mut R) -> DMatrix<f64> {
    match method {
        RandomMethod::OrthogonalDiag => {
            let d = DVector::from_fn(n, |_, _| {
                let v = rng.random_range(1..=25) as f64;
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                0.1 * sign * v
            });
            let v = random_orthogonal(n, rng);
            let a = v.transpose() * DMatrix::from_diagonal(&d) * &v;
            (&a + a.transpose()) * 0.5
        }
        RandomMethod::Gaussian => gaussian_matrix(n, n, rng),
        RandomMethod::GaussianX10 => gaussian_matrix(n, n, rng) * 10.0,
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedSystem {
    pub system: SwitchedLinearSystem,
    /// Draws thrown away before this one (singular, uncontrollable or
    /// unobservable).
    pub rejected: usize,
}

/// Draws `(A, B, C)` until `A` is invertible and the all-ones signal of
/// length `horizon` makes the system controllable and observable.
pub fn random_system<R: Rng>(
    n: usize,
    m: usize,
    p: usize,
    method: RandomMethod,
    horizon: usize,
    rank_tol: RankTolerance,
    max_rejections: usize,
    rng: &mut R,
) -> Result<GeneratedSystem> {
    if n == 0 || m == 0 || p == 0 || horizon == 0 {
        return Err(Error::Config("dimensions and horizon must be positive".into()));
    }
    let mut rejected = 0;
    loop {
        let a = random_state_matrix(n, method, rng);
        let b = gaussian_matrix(n, m, rng);
        let c = gaussian_matrix(p, n, rng);
        match SwitchedLinearSystem::new(a, b, c) {
            Ok(sys) if sys.is_controllable_and_observable(horizon, rank_tol) => {
                return Ok(GeneratedSystem {
                    system: sys,
                    rejected,
                })
            }
            Ok(_) | Err(Error::SingularStateMatrix { .. }) => {}
            Err(e) => return Err(e),
        }
        rejected += 1;
        if rejected > max_rejections {
            return Err(Error::GenerationExhausted { attempts: rejected });
        }
    }
}

/// Relative performance degradation in percent, or `None` when the nominal
/// value is too small to divide by.
pub fn rpd(worst: f64, nominal: f64) -> Option<f64> {
    (nominal > NOMINAL_TOL).then(|| 100.0 * (worst - nominal) / nominal)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub problem: ProblemId,
    pub k: usize,
    /// State dimension.
    pub states: usize,
    /// Inputs and outputs.
    pub inputs: usize,
    pub samples: usize,
    pub horizon: usize,
    pub seed: u64,
    pub mode: Mode,
    /// `None` selects the default `max(rows, cols)·ε·σ_max` rule.
    pub tol_rank: Option<f64>,
    pub tol_feas: f64,
    pub exhaustive_cap: usize,
    pub max_rejections: usize,
    /// Fraction of failed samples above which a study is reported as failed.
    pub max_failure_fraction: f64,
    /// Entry value of the all-equal `x0` / `x_f` vectors.
    pub vector_fill: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::I,
            k: 1,
            states: 10,
            inputs: 7,
            samples: 50,
            horizon: 12,
            seed: 7,
            mode: Mode::Minimal,
            tol_rank: None,
            tol_feas: 1e-9,
            exhaustive_cap: crate::worst_case::DEFAULT_EXHAUSTIVE_CAP,
            max_rejections: 100,
            max_failure_fraction: 0.5,
            vector_fill: 1.0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.problem == ProblemId::IV {
            return Err(Error::Config(
                "problem IV is a yes/no containment test and has no degradation measure".into(),
            ));
        }
        if self.k == 0 || self.states == 0 || self.inputs == 0 || self.horizon == 0 {
            return Err(Error::Config("k, states, inputs and horizon must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        Ok(())
    }

    pub fn rank_tolerance(&self) -> RankTolerance {
        self.tol_rank.map_or(RankTolerance::Default, RankTolerance::Relative)
    }

    fn worst_case_options(&self) -> WorstCaseOptions {
        WorstCaseOptions {
            mode: self.mode,
            solver: SolverOptions {
                rank_tol: self.rank_tolerance(),
                feas_tol: self.tol_feas,
                ..SolverOptions::default()
            },
            exhaustive_cap: self.exhaustive_cap,
        }
    }

    fn problem(&self) -> Result<Problem> {
        let ones = DVector::from_element(self.states, self.vector_fill);
        Ok(match self.problem {
            ProblemId::I => Problem::EstimationTime,
            ProblemId::II => Problem::ControlTime { x0: ones },
            ProblemId::III => Problem::Fuel {
                target: ones,
                input_bound: None,
            },
            ProblemId::V => Problem::MaxMinLqr {
                weights: LqrWeights::identity(self.states, self.inputs, self.horizon)?,
                x0: ones,
            },
            ProblemId::VI => Problem::FixedInputLqr {
                weights: LqrWeights::identity(self.states, self.inputs, self.horizon)?,
                x0: ones,
            },
            ProblemId::IV => unreachable!("rejected by validate"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Ok,
    /// Dropout-free value is zero (or numerically so).
    DiscardedDegenerateNominal,
    /// Dropout-free or worst value is infeasible within the horizon.
    DiscardedInfeasible,
    /// No acceptable system within the rejection budget, or an evaluation
    /// error.
    Failed,
}

impl fmt::Display for SampleStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleStatus::Ok => "ok",
            SampleStatus::DiscardedDegenerateNominal => "discarded_degenerate_nominal",
            SampleStatus::DiscardedInfeasible => "discarded_infeasible",
            SampleStatus::Failed => "failed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRow {
    pub sample_id: usize,
    pub method: RandomMethod,
    pub rpd_percent: Option<f64>,
    pub nominal: Option<Value>,
    pub worst: Option<Value>,
    pub argmax_signal: Option<Signal>,
    pub status: SampleStatus,
    pub detail: Option<String>,
    pub rejected_draws: usize,
    pub time_fast_secs: f64,
    pub time_filter_secs: f64,
    pub time_solve_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<WorstCaseReport>,
}

impl SampleRow {
    pub fn csv_header() -> &'static str {
        "sample_id,method,rpd_percent,nominal,worst,argmax_signal,status"
    }

    /// Deterministic columns only; timings are left out.
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.sample_id,
            self.method,
            opt(self.rpd_percent.map(|v| v.to_string())),
            opt(self.nominal.map(|v| v.to_string())),
            opt(self.worst.map(|v| v.to_string())),
            opt(self.argmax_signal.as_ref().map(|s| s.to_string())),
            self.status
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub generator: String,
    /// Over retained samples; `None` when nothing was retained.
    pub avg_rpd: Option<f64>,
    pub avg_time_fast: Option<f64>,
    pub avg_time_filter: Option<f64>,
    pub avg_time_solve: Option<f64>,
    pub retained_samples: usize,
    pub discarded_samples: usize,
    pub failed_samples: usize,
    pub rows: Vec<SampleRow>,
}

impl StudyResult {
    pub fn failure_fraction(&self) -> f64 {
        self.failed_samples as f64 / self.rows.len().max(1) as f64
    }

    pub fn exceeds_failure_threshold(&self) -> bool {
        self.failure_fraction() > self.config.max_failure_fraction
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SampleRow::csv_header());
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }
}

/// Time-type problems are compared in step counts (`t + 1`).
fn comparable(problem: ProblemId, v: Value) -> Value {
    match (problem, v) {
        (ProblemId::I | ProblemId::II, Value::Finite(t)) => Value::Finite(t + 1.0),
        _ => v,
    }
}

fn run_sample(cfg: &StudyConfig, problem: &Problem, sample_id: usize, keep_report: bool) -> SampleRow {
    let method = RandomMethod::for_sample(sample_id);
    let mut row = SampleRow {
        sample_id,
        method,
        rpd_percent: None,
        nominal: None,
        worst: None,
        argmax_signal: None,
        status: SampleStatus::Failed,
        detail: None,
        rejected_draws: 0,
        time_fast_secs: 0.0,
        time_filter_secs: 0.0,
        time_solve_secs: 0.0,
        report: None,
    };
    let mut rng = sample_rng(cfg.seed, sample_id);
    let generated = match random_system(
        cfg.states,
        cfg.inputs,
        cfg.inputs,
        method,
        cfg.horizon,
        cfg.rank_tolerance(),
        cfg.max_rejections,
        &mut rng,
    ) {
        Ok(g) => g,
        Err(e) => {
            row.detail = Some(e.to_string());
            return row;
        }
    };
    row.rejected_draws = generated.rejected;
    let sys = generated.system;

    let started = Instant::now();
    let fast = minimal_signals_bfs(cfg.k, cfg.horizon);
    row.time_fast_secs = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let filtered = minimal_filter(&k_constraint_automaton(cfg.k).enumerate_admissible(cfg.horizon));
    row.time_filter_secs = started.elapsed().as_secs_f64();
    debug_assert_eq!(fast, filtered);

    let opts = cfg.worst_case_options();
    let started = Instant::now();
    let outcome = evaluate_signal(&sys, problem, &Signal::ones(cfg.horizon), &opts.solver).and_then(|nominal| {
        if nominal.value == Value::Infinite && !keep_report {
            // every dropout signal is dominated by the nominal one, so the
            // worst case is infinite too and the sample is discarded anyway
            return Ok((nominal, None));
        }
        worst_case(&sys, &Constraint::MaxConsecutiveDropouts(cfg.k), cfg.horizon, problem, &opts)
            .map(|report| (nominal, Some(report)))
    });
    row.time_solve_secs = started.elapsed().as_secs_f64();
    let (nominal, report) = match outcome {
        Ok(v) => v,
        Err(e) => {
            row.detail = Some(e.to_string());
            return row;
        }
    };

    let nominal = comparable(cfg.problem, nominal.value);
    let worst = report.as_ref().map_or(Value::Infinite, |r| comparable(cfg.problem, r.worst_value));
    row.nominal = Some(nominal);
    row.worst = Some(worst);
    if let Some(report) = report {
        row.argmax_signal = report.argmax_signal.clone();
        if !report.warnings.is_empty() {
            row.detail = Some(report.warnings.join("; "));
        }
        if keep_report {
            row.report = Some(report);
        }
    }
    row.status = match (nominal, worst) {
        (Value::Finite(nom), Value::Finite(w)) => match rpd(w, nom) {
            Some(r) => {
                row.rpd_percent = Some(r);
                SampleStatus::Ok
            }
            None => SampleStatus::DiscardedDegenerateNominal,
        },
        _ => SampleStatus::DiscardedInfeasible,
    };
    row
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Runs every sample of the study. Per-sample failures are recorded in the
/// rows and never abort the run.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    run_study_with(cfg, false)
}

/// Like [`run_study`]; `keep_reports` attaches each sample's full
/// worst-case report to its row.
pub fn run_study_with(cfg: &StudyConfig, keep_reports: bool) -> Result<StudyResult> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let rows: Vec<SampleRow> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| run_sample(cfg, &problem, i, keep_reports))
        .collect();
    let retained: Vec<&SampleRow> = rows.iter().filter(|r| r.status == SampleStatus::Ok).collect();
    let failed = rows.iter().filter(|r| r.status == SampleStatus::Failed).count();
    Ok(StudyResult {
        config: cfg.clone(),
        generator: GENERATOR_NAME.to_string(),
        avg_rpd: mean(retained.iter().filter_map(|r| r.rpd_percent)),
        avg_time_fast: mean(retained.iter().map(|r| r.time_fast_secs)),
        avg_time_filter: mean(retained.iter().map(|r| r.time_filter_secs)),
        avg_time_solve: mean(retained.iter().map(|r| r.time_solve_secs)),
        retained_samples: retained.len(),
        discarded_samples: rows.len() - retained.len() - failed,
        failed_samples: failed,
        rows,
    })
}
