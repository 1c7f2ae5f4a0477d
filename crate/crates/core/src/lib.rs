//! Worst-case performance of optimal estimation and control for discrete-time
//! linear systems whose packets are dropped according to a constraint
//! automaton.
//!
//! The search space of dropout signals is cut down to the minimal signals of
//! the dominance order (fewest successful transmissions), over which each
//! problem's per-signal value is evaluated: observability rank, LP
//! feasibility, least-norm inputs, reachability ellipsoids or Riccati
//! recursions.

pub mod automata;
pub mod error;
pub mod lqr;
pub mod matrix_io;
pub mod solvers;
pub mod study;
pub mod system;
pub mod worst_case;

pub use automata::{
    dominates, is_minimal_k, k_constraint_automaton, k_minimal_automaton, minimal_filter,
    minimal_signals_bfs, Automaton, Edge, Signal, SignalSet,
};
pub use error::{Error, Result};
pub use lqr::{degraded_cost, lqr_cost, lti_gains, riccati_backward, GainSchedule, LqrWeights, RiccatiSolution};
pub use solvers::{
    min_energy, min_fuel, min_fuel_energy, min_inf_norm, SolveResult, SolveStatus, SolverOptions,
};
pub use system::{numerical_rank, Gramian, RankTolerance, SwitchedLinearSystem, Trajectory};
pub use worst_case::{
    polytope_reachable, worst_case, worst_control_time, worst_energy, worst_estimation_time,
    worst_fixed_input_lqr, worst_fuel, worst_fuel_energy, worst_lqr, Constraint, Mode, Polytope,
    Problem, ProblemId, ReachabilityReport, Value, WorstCaseOptions, WorstCaseReport,
};
