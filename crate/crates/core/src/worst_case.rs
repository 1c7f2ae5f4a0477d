//! Worst case of a per-signal subproblem over a dropout constraint.
//!
//! Every problem here has a per-signal value that is antitone in the
//! dominance order: more successful transmissions never make it worse. The
//! maximum over all admissible signals is therefore attained on a minimal
//! signal, and [`Mode::Minimal`] only evaluates those. [`Mode::Exhaustive`]
//! evaluates the whole admissible language and serves as the ground truth.
//!
//! Infeasible signals count as `+∞`. Ties on the worst value go to the
//! lexicographically smallest signal.

use std::cmp::Ordering;
use std::fmt;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::automata::{
    k_constraint_automaton, minimal_filter, minimal_signals_bfs, Automaton, Signal, SignalSet,
};
use crate::error::{Error, Result};
use crate::lqr::{degraded_cost, lqr_cost, lti_gains, riccati_backward, GainSchedule, LqrWeights};
use crate::solvers::{
    in_range, least_norm, min_energy, min_fuel, min_fuel_energy, min_inf_norm, SolveStatus,
    SolverOptions,
};
use crate::system::SwitchedLinearSystem;

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 1 << 20;

/// Relative slack on the `vᵀW⁻¹v ≤ 1` test.
pub const REACH_TOL: f64 = 1e-9;

/// Which dropout signals are allowed.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// At most `k` consecutive dropouts.
    MaxConsecutiveDropouts(usize),
    Automaton(Automaton),
}

impl Constraint {
    pub fn automaton(&self) -> Automaton {
        match self {
            Constraint::MaxConsecutiveDropouts(k) => k_constraint_automaton(*k),
            Constraint::Automaton(a) => a.clone(),
        }
    }

    /// The signals a worst-case search visits in the given mode.
    pub fn signals(&self, len: usize, mode: Mode, cap: usize) -> Result<SignalSet> {
        match (mode, self) {
            (Mode::Minimal, Constraint::MaxConsecutiveDropouts(k)) => Ok(minimal_signals_bfs(*k, len)),
            (Mode::Minimal, Constraint::Automaton(a)) => {
                Ok(minimal_filter(&a.enumerate_admissible_capped(len, cap)?))
            }
            (Mode::Exhaustive, c) => c.automaton().enumerate_admissible_capped(len, cap),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Minimal,
    Exhaustive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Minimal => "minimal",
            Mode::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemId {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" | "1" => ProblemId::I,
            "II" | "2" => ProblemId::II,
            "III" | "3" => ProblemId::III,
            "IV" | "4" => ProblemId::IV,
            "V" | "5" => ProblemId::V,
            "VI" | "6" => ProblemId::VI,
            other => return Err(Error::Parse(format!("unknown problem id {other:?}"))),
        })
    }
}

/// A per-signal value, with infeasibility ranked above every finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Finite(f64),
    Infinite,
}

impl Value {
    pub fn finite(self) -> Option<f64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.total_cmp(b),
            (Value::Finite(_), Value::Infinite) => Ordering::Less,
            (Value::Infinite, Value::Finite(_)) => Ordering::Greater,
            (Value::Infinite, Value::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Finite(v) => s.serialize_f64(*v),
            Value::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Ok,
    Infeasible,
    /// An iterative solve hit its cap; the value is an upper bound.
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalEntry {
    pub signal: Signal,
    pub value: Value,
    pub status: EntryStatus,
}

impl SignalEntry {
    fn finite(signal: &Signal, v: f64) -> Self {
        SignalEntry {
            signal: signal.clone(),
            value: Value::Finite(v),
            status: EntryStatus::Ok,
        }
    }

    fn infeasible(signal: &Signal) -> Self {
        SignalEntry {
            signal: signal.clone(),
            value: Value::Infinite,
            status: EntryStatus::Infeasible,
        }
    }

    fn from_time(signal: &Signal, t: Option<usize>) -> Self {
        match t {
            Some(t) => Self::finite(signal, t as f64),
            None => Self::infeasible(signal),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub problem: ProblemId,
    /// Sub-objective name, e.g. `fuel` or `energy` for problem III.
    pub objective: String,
    pub mode: Mode,
    pub horizon: usize,
    pub worst_value: Value,
    /// `None` only when the signal set is empty.
    pub argmax_signal: Option<Signal>,
    /// For the time problems: `worst_value + 1`, the number of steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_steps: Option<Value>,
    /// For the time problems: whether the worst time fits in the horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
    pub signal_count: usize,
    pub per_signal: Vec<SignalEntry>,
    pub wallclock_secs: f64,
    pub warnings: Vec<String>,
}

impl WorstCaseReport {
    pub fn entry(&self, signal: &Signal) -> Option<&SignalEntry> {
        self.per_signal.iter().find(|e| &e.signal == signal)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WorstCaseOptions {
    pub mode: Mode,
    pub solver: SolverOptions,
    pub exhaustive_cap: usize,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Minimal,
            solver: SolverOptions::default(),
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

impl WorstCaseOptions {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// A performance problem together with its data.
#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    /// I: first step at which the observed outputs pin down `x(0)`.
    EstimationTime,
    /// II: first step `t` with `x(t+1) = 0` reachable under `|u_i| ≤ 1`.
    ControlTime { x0: DVector<f64> },
    /// III, 1-norm: optionally with `|u_i| ≤ bound`.
    Fuel {
        target: DVector<f64>,
        input_bound: Option<f64>,
    },
    /// III, 2-norm.
    Energy { target: DVector<f64> },
    /// III, mixed objective.
    FuelEnergy {
        target: DVector<f64>,
        gamma1: f64,
        gamma2: f64,
    },
    /// V: optimal LQR cost along the signal.
    MaxMinLqr { weights: LqrWeights, x0: DVector<f64> },
    /// VI: cost of the dropout-free LQR gains run through the lossy loop.
    FixedInputLqr { weights: LqrWeights, x0: DVector<f64> },
}

impl Problem {
    pub fn id(&self) -> ProblemId {
        match self {
            Problem::EstimationTime => ProblemId::I,
            Problem::ControlTime { .. } => ProblemId::II,
            Problem::Fuel { .. } | Problem::Energy { .. } | Problem::FuelEnergy { .. } => ProblemId::III,
            Problem::MaxMinLqr { .. } => ProblemId::V,
            Problem::FixedInputLqr { .. } => ProblemId::VI,
        }
    }

    pub fn objective(&self) -> &'static str {
        match self {
            Problem::EstimationTime => "estimation_time",
            Problem::ControlTime { .. } => "control_time",
            Problem::Fuel { .. } => "fuel",
            Problem::Energy { .. } => "energy",
            Problem::FuelEnergy { .. } => "fuel_energy",
            Problem::MaxMinLqr { .. } => "lqr_maxmin",
            Problem::FixedInputLqr { .. } => "lqr_fixed",
        }
    }

    fn is_time(&self) -> bool {
        matches!(self, Problem::EstimationTime | Problem::ControlTime { .. })
    }

    fn validate(&self, sys: &SwitchedLinearSystem, horizon: usize) -> Result<()> {
        let check_vec = |name: &str, v: &DVector<f64>| {
            if v.len() != sys.n() {
                Err(Error::Dimension(format!("{name} has length {}, expected {}", v.len(), sys.n())))
            } else {
                Ok(())
            }
        };
        match self {
            Problem::EstimationTime => Ok(()),
            Problem::ControlTime { x0 } => check_vec("x0", x0),
            Problem::Fuel { target, input_bound } => {
                if let Some(b) = input_bound {
                    if !(*b > 0.0) {
                        return Err(Error::Config("input bound must be positive".into()));
                    }
                }
                check_vec("x_f", target)
            }
            Problem::Energy { target } => check_vec("x_f", target),
            Problem::FuelEnergy {
                target,
                gamma1,
                gamma2,
            } => {
                if !(*gamma1 >= 0.0 && *gamma2 >= 0.0 && gamma1 + gamma2 > 0.0) {
                    return Err(Error::Config(
                        "gamma1, gamma2 must be nonnegative with a positive sum".into(),
                    ));
                }
                check_vec("x_f", target)
            }
            Problem::MaxMinLqr { weights, x0 } | Problem::FixedInputLqr { weights, x0 } => {
                if weights.horizon() != horizon {
                    return Err(Error::Dimension(format!(
                        "weights horizon {} differs from the requested horizon {horizon}",
                        weights.horizon()
                    )));
                }
                if weights.q().nrows() != sys.n() || weights.r().nrows() != sys.m() {
                    return Err(Error::Dimension("weights do not match system dimensions".into()));
                }
                check_vec("x0", x0)
            }
        }
    }

    fn prepare(&self, sys: &SwitchedLinearSystem) -> Result<Prepared> {
        Ok(match self {
            Problem::FixedInputLqr { weights, .. } => Prepared {
                gains: Some(lti_gains(sys, weights)?),
            },
            _ => Prepared { gains: None },
        })
    }
}

struct Prepared {
    gains: Option<GainSchedule>,
}

/// Value of `problem` along one signal.
pub fn evaluate_signal(
    sys: &SwitchedLinearSystem,
    problem: &Problem,
    signal: &Signal,
    opts: &SolverOptions,
) -> Result<SignalEntry> {
    problem.validate(sys, signal.len())?;
    let prepared = problem.prepare(sys)?;
    evaluate_prepared(sys, problem, &prepared, signal, opts)
}

fn evaluate_prepared(
    sys: &SwitchedLinearSystem,
    problem: &Problem,
    prepared: &Prepared,
    signal: &Signal,
    opts: &SolverOptions,
) -> Result<SignalEntry> {
    let from_solve = |r: crate::solvers::SolveResult| match r.status {
        SolveStatus::Optimal => SignalEntry::finite(signal, r.value),
        SolveStatus::Infeasible => SignalEntry::infeasible(signal),
        SolveStatus::MaxIterations => SignalEntry {
            signal: signal.clone(),
            value: Value::Finite(r.value),
            status: EntryStatus::MaxIterations,
        },
    };
    Ok(match problem {
        Problem::EstimationTime => {
            SignalEntry::from_time(signal, sys.first_full_rank_time(signal, opts.rank_tol))
        }
        Problem::ControlTime { x0 } => {
            SignalEntry::from_time(signal, control_time(sys, signal, x0, opts))
        }
        Problem::Fuel {
            target,
            input_bound,
        } => from_solve(min_fuel(
            &sys.controllability_matrix(signal),
            target,
            *input_bound,
            opts,
        )),
        Problem::Energy { target } => {
            from_solve(min_energy(&sys.controllability_matrix(signal), target, opts))
        }
        Problem::FuelEnergy {
            target,
            gamma1,
            gamma2,
        } => from_solve(min_fuel_energy(
            &sys.controllability_matrix(signal),
            target,
            *gamma1,
            *gamma2,
            opts,
        )),
        Problem::MaxMinLqr { weights, x0 } => {
            let sol = riccati_backward(sys, signal, weights)?;
            SignalEntry::finite(signal, lqr_cost(&sol, x0))
        }
        Problem::FixedInputLqr { weights, x0 } => {
            let gains = prepared.gains.as_ref().expect("gains prepared for problem VI");
            SignalEntry::finite(signal, degraded_cost(sys, gains, signal, weights, x0)?)
        }
    })
}

/// Smallest `t` such that `−A^{t+1} x0` is reachable with `‖ū‖∞ ≤ 1`
/// through the controllability matrix of `σ(0..=t)`.
///
/// A dropout at `t > 0` maps the problem at `t − 1` through the invertible
/// `A`, so feasibility only changes at successful steps; those are the only
/// horizons solved.
pub fn control_time(
    sys: &SwitchedLinearSystem,
    signal: &Signal,
    x0: &DVector<f64>,
    opts: &SolverOptions,
) -> Option<usize> {
    if x0.iter().all(|&v| v == 0.0) {
        return Some(0);
    }
    let mut drift = x0.clone();
    for t in 0..signal.len() {
        drift = sys.a() * drift;
        if !signal.get(t) {
            continue;
        }
        let cmat = sys.controllability_matrix(&signal.prefix(t + 1));
        let target = -&drift;
        // the least-norm input brackets the peak: ‖u‖∞ ≤ ‖u*‖∞ and
        // ‖u‖∞ ≥ ‖u*‖₂/√len, so the LP only decides the gap between them
        let least = min_energy(&cmat, &target, opts);
        if least.is_optimal() {
            if least.input.amax() <= 1.0 + opts.feas_tol {
                return Some(t);
            }
            if least.value > (1.0 + opts.feas_tol) * (cmat.ncols() as f64).sqrt() * (1.0 + 1e-9) {
                continue;
            }
        } else if least.status == SolveStatus::Infeasible {
            continue;
        }
        let r = min_inf_norm(&cmat, &target, opts);
        if r.is_optimal() && r.value <= 1.0 + opts.feas_tol {
            return Some(t);
        }
    }
    None
}

fn reduce(
    problem_id: ProblemId,
    objective: &str,
    mode: Mode,
    horizon: usize,
    per_signal: Vec<SignalEntry>,
    started: Instant,
) -> WorstCaseReport {
    let mut worst: Option<&SignalEntry> = None;
    // entries arrive in lexicographic order; only a strictly larger value
    // displaces the current argmax
    for e in &per_signal {
        if worst.is_none_or(|w| e.value.total_cmp(&w.value) == Ordering::Greater) {
            worst = Some(e);
        }
    }
    let worst_value = worst.map_or(Value::Finite(f64::NEG_INFINITY), |w| w.value);
    let argmax_signal = worst.map(|w| w.signal.clone());
    let mut warnings = Vec::new();
    let capped = per_signal
        .iter()
        .filter(|e| e.status == EntryStatus::MaxIterations)
        .count();
    if capped > 0 {
        warnings.push(format!("{capped} per-signal solves stopped at the iteration limit"));
    }
    WorstCaseReport {
        problem: problem_id,
        objective: objective.to_string(),
        mode,
        horizon,
        worst_value,
        argmax_signal,
        worst_steps: None,
        feasible: None,
        signal_count: per_signal.len(),
        per_signal,
        wallclock_secs: started.elapsed().as_secs_f64(),
        warnings,
    }
}

/// Evaluates `problem` on every signal the mode selects and takes the
/// maximum.
pub fn worst_case(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    problem: &Problem,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    problem.validate(sys, horizon)?;
    let started = Instant::now();
    let signals = constraint.signals(horizon, opts.mode, opts.exhaustive_cap)?.to_vec();
    let prepared = problem.prepare(sys)?;
    let per_signal = signals
        .par_iter()
        .map(|s| evaluate_prepared(sys, problem, &prepared, s, &opts.solver))
        .collect::<Result<Vec<_>>>()?;
    let mut report = reduce(problem.id(), problem.objective(), opts.mode, horizon, per_signal, started);
    if problem.is_time() && report.argmax_signal.is_some() {
        report.worst_steps = Some(match report.worst_value {
            Value::Finite(t) => Value::Finite(t + 1.0),
            Value::Infinite => Value::Infinite,
        });
        report.feasible = Some(report.worst_value.is_finite());
    }
    if matches!(problem, Problem::FixedInputLqr { .. }) && opts.mode == Mode::Minimal {
        report.warnings.push(
            "minimal mode for the fixed-gain LQR cost assumes the degraded cost is antitone \
             in the dominance order; run exhaustive mode to confirm"
                .into(),
        );
    }
    report.wallclock_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

pub fn worst_estimation_time(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    worst_case(sys, constraint, horizon, &Problem::EstimationTime, opts)
}

pub fn worst_control_time(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    x0: &DVector<f64>,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    worst_case(sys, constraint, horizon, &Problem::ControlTime { x0: x0.clone() }, opts)
}

pub fn worst_fuel(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    target: &DVector<f64>,
    input_bound: Option<f64>,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    let problem = Problem::Fuel {
        target: target.clone(),
        input_bound,
    };
    worst_case(sys, constraint, horizon, &problem, opts)
}

pub fn worst_energy(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    target: &DVector<f64>,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    worst_case(sys, constraint, horizon, &Problem::Energy { target: target.clone() }, opts)
}

pub fn worst_fuel_energy(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    target: &DVector<f64>,
    gamma1: f64,
    gamma2: f64,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    let problem = Problem::FuelEnergy {
        target: target.clone(),
        gamma1,
        gamma2,
    };
    worst_case(sys, constraint, horizon, &problem, opts)
}

pub fn worst_lqr(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    weights: &LqrWeights,
    x0: &DVector<f64>,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    let problem = Problem::MaxMinLqr {
        weights: weights.clone(),
        x0: x0.clone(),
    };
    worst_case(sys, constraint, weights.horizon(), &problem, opts)
}

pub fn worst_fixed_input_lqr(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    weights: &LqrWeights,
    x0: &DVector<f64>,
    opts: &WorstCaseOptions,
) -> Result<WorstCaseReport> {
    let problem = Problem::FixedInputLqr {
        weights: weights.clone(),
        x0: x0.clone(),
    };
    worst_case(sys, constraint, weights.horizon(), &problem, opts)
}

/// `conv{v_1, …, v_p}`
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    vertices: Vec<DVector<f64>>,
}

impl Polytope {
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::Config("a polytope needs at least one vertex".into()));
        };
        let dim = first.len();
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("polytope vertices differ in dimension".into()));
        }
        Ok(Self { vertices })
    }

    /// `{"vertices": [[..], [..]]}`
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            vertices: Vec<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        Self::new(raw.vertices.into_iter().map(DVector::from_vec).collect())
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v * alpha).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachabilityReport {
    pub reachable: bool,
    /// Index of the vertex attaining the worst quadratic form.
    pub worst_vertex: Option<usize>,
    /// Per signal: the largest `vᵀW⁻¹v` over the vertices.
    pub report: WorstCaseReport,
}

/// `vᵀW⁻¹v`, or `+∞` when `v` is outside the range of `W`.
fn ellipsoid_form(w: &nalgebra::DMatrix<f64>, v: &DVector<f64>, opts: &SolverOptions) -> Value {
    if v.iter().all(|&x| x == 0.0) {
        return Value::Finite(0.0);
    }
    if !in_range(w, v, opts.rank_tol) {
        return Value::Infinite;
    }
    let y = least_norm(w, v, opts.rank_tol);
    Value::Finite(v.dot(&y))
}

/// Whether every vertex of `poly` lies in the unit-energy reachable
/// ellipsoid `{x : xᵀW_σ⁻¹x ≤ 1}` of every selected signal.
pub fn polytope_reachable(
    sys: &SwitchedLinearSystem,
    constraint: &Constraint,
    horizon: usize,
    poly: &Polytope,
    opts: &WorstCaseOptions,
) -> Result<ReachabilityReport> {
    if poly.vertices[0].len() != sys.n() {
        return Err(Error::Dimension(format!(
            "polytope lives in dimension {}, system state has {}",
            poly.vertices[0].len(),
            sys.n()
        )));
    }
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    let started = Instant::now();
    let signals = constraint.signals(horizon, opts.mode, opts.exhaustive_cap)?.to_vec();
    let rows: Vec<(SignalEntry, usize)> = signals
        .par_iter()
        .map(|s| {
            let gram = sys.reachability_gramian(s);
            let (idx, value) = poly
                .vertices
                .iter()
                .map(|v| ellipsoid_form(&gram.w, v, &opts.solver))
                .enumerate()
                .fold((0, Value::Finite(f64::NEG_INFINITY)), |best, (i, v)| {
                    if v.total_cmp(&best.1) == Ordering::Greater { (i, v) } else { best }
                });
            let status = if value.is_finite() { EntryStatus::Ok } else { EntryStatus::Infeasible };
            (
                SignalEntry {
                    signal: s.clone(),
                    value,
                    status,
                },
                idx,
            )
        })
        .collect();
    let (per_signal, vertex_idx): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let report = reduce(ProblemId::IV, "reachability", opts.mode, horizon, per_signal, started);
    let worst_vertex = report
        .argmax_signal
        .as_ref()
        .and_then(|s| report.per_signal.iter().position(|e| &e.signal == s))
        .map(|i| vertex_idx[i]);
    let reachable = match report.worst_value {
        Value::Finite(v) => v <= 1.0 + REACH_TOL,
        Value::Infinite => false,
    };
    Ok(ReachabilityReport {
        reachable,
        worst_vertex,
        report,
    })
}

/// One line per report: `problem,mode,worst_value,argmax_signal,wallclock`.
pub fn csv_summary_header() -> &'static str {
    "problem,mode,worst_value,argmax_signal,wallclock"
}

pub fn csv_summary_row(r: &WorstCaseReport) -> String {
    format!(
        "{},{},{},{},{}",
        r.problem,
        r.mode,
        r.worst_value,
        r.argmax_signal.as_ref().map(|s| s.to_string()).unwrap_or_default(),
        r.wallclock_secs
    )
}
