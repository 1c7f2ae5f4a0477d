//! Per-signal convex subproblems over `C ū = x_f`: least 2-norm, least
//! 1-norm (LP), least ∞-norm (LP) and the mixed `γ₁‖ū‖₁ + γ₂‖ū‖₂`
//! objective (operator splitting).

pub mod admm;
pub mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::system::{numerical_rank, RankTolerance};
pub use admm::AdmmOptions;
pub use simplex::{LpSolution, LpStatus, SimplexOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Iterative solver stopped early; `input` holds the best iterate.
    MaxIterations,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub dual_value: f64,
    pub relative_gap: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub input: DVector<f64>,
    pub value: f64,
    pub status: SolveStatus,
    /// `‖C ū − x_f‖₂`
    pub residual: f64,
    pub certificate: Option<DualCertificate>,
}

impl SolveResult {
    fn infeasible(len: usize) -> Self {
        SolveResult {
            input: DVector::zeros(len),
            value: f64::INFINITY,
            status: SolveStatus::Infeasible,
            residual: f64::NAN,
            certificate: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub rank_tol: RankTolerance,
    /// Slack allowed on the `‖ū‖∞ ≤ 1` feasibility predicate.
    pub feas_tol: f64,
    pub simplex: SimplexOptions,
    pub admm: AdmmOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rank_tol: RankTolerance::Default,
            feas_tol: 1e-9,
            simplex: SimplexOptions::default(),
            admm: AdmmOptions::default(),
        }
    }
}

/// `rank [C | x] == rank C`.
pub fn in_range(cmat: &DMatrix<f64>, x: &DVector<f64>, tol: RankTolerance) -> bool {
    if x.iter().all(|&v| v == 0.0) {
        return true;
    }
    let rank = numerical_rank(cmat, tol);
    let augmented = DMatrix::from_fn(cmat.nrows(), cmat.ncols() + 1, |i, j| {
        if j < cmat.ncols() { cmat[(i, j)] } else { x[i] }
    });
    numerical_rank(&augmented, tol) == rank
}

fn check_shapes(cmat: &DMatrix<f64>, x: &DVector<f64>) {
    assert_eq!(cmat.nrows(), x.len(), "target length must match the row count");
}

fn residual(cmat: &DMatrix<f64>, u: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (cmat * u - x).norm()
}

/// Pseudo-inverse solution `C⁺ x`, truncating singular values under the
/// rank tolerance.
pub(crate) fn least_norm(cmat: &DMatrix<f64>, x: &DVector<f64>, tol: RankTolerance) -> DVector<f64> {
    if cmat.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = cmat.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return DVector::zeros(cmat.ncols());
    }
    let eps = tol.threshold(cmat.nrows(), cmat.ncols(), sigma_max);
    svd.solve(x, eps).expect("both singular vector sets were computed")
}

/// Minimum 2-norm input reaching `x`.
pub fn min_energy(cmat: &DMatrix<f64>, x: &DVector<f64>, opts: &SolverOptions) -> SolveResult {
    check_shapes(cmat, x);
    if !in_range(cmat, x, opts.rank_tol) {
        return SolveResult::infeasible(cmat.ncols());
    }
    let u = least_norm(cmat, x, opts.rank_tol);
    SolveResult {
        value: u.norm(),
        residual: residual(cmat, &u, x),
        input: u,
        status: SolveStatus::Optimal,
        certificate: None,
    }
}

/// The equivalent system `V_rᵀ ū = Σ_r⁻¹ U_rᵀ x` over the numerically
/// nonzero singular triplets of `C`. Valid only for consistent `(C, x)`.
fn orthonormal_rows(cmat: &DMatrix<f64>, x: &DVector<f64>, tol: RankTolerance) -> (DMatrix<f64>, DVector<f64>) {
    let svd = cmat.clone().svd(true, true);
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let sigma_max = svd.singular_values.max();
    let eps = tol.threshold(cmat.nrows(), cmat.ncols(), sigma_max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| sigma_max > 0.0 && svd.singular_values[i] > eps)
        .collect();
    // unit rows: entries at round-off level are structural zeros (dropped
    // inputs) and are restored as such
    let chop = f64::EPSILON * cmat.ncols().max(1) as f64;
    let rows = v_t.select_rows(&keep).map(|v| if v.abs() <= chop { 0.0 } else { v });
    let rhs = DVector::from_iterator(
        keep.len(),
        keep.iter().map(|&i| u.column(i).dot(x) / svd.singular_values[i]),
    );
    (rows, rhs)
}

const CERTIFICATE_TOL: f64 = 1e-9;

fn certified(sol: &LpSolution) -> bool {
    sol.status == LpStatus::Optimal
        && sol.relative_gap <= CERTIFICATE_TOL
        && sol.dual_infeasibility <= CERTIFICATE_TOL
}

/// Solves the LP that `build` assembles around equality rows `(E, r)`,
/// first with `(C, x)` itself and, unless that result carries a clean dual
/// certificate, again with the orthonormal rows of `C`. Nearly parallel
/// columns defeat the first form; columns of very different gains can
/// defeat the second.
fn lp_with_fallback(
    cmat: &DMatrix<f64>,
    x: &DVector<f64>,
    opts: &SolverOptions,
    build: impl Fn(&DMatrix<f64>, &DVector<f64>) -> (DMatrix<f64>, DVector<f64>, DVector<f64>),
) -> Option<LpSolution> {
    let (a, b, c) = build(cmat, x);
    let raw = simplex::solve(&a, &b, &c, &opts.simplex);
    if certified(&raw) {
        return Some(raw);
    }
    let (eq, rhs) = orthonormal_rows(cmat, x, opts.rank_tol);
    let (a, b, c) = build(&eq, &rhs);
    let alt = simplex::solve(&a, &b, &c, &opts.simplex);
    let badness = |s: &LpSolution| s.relative_gap.max(s.dual_infeasibility);
    match (raw.status == LpStatus::Optimal, alt.status == LpStatus::Optimal) {
        (true, true) if badness(&alt) < badness(&raw) => Some(alt),
        (true, _) => Some(raw),
        (false, true) => Some(alt),
        (false, false) => None,
    }
}

/// Minimum 1-norm input reaching `x`, optionally with `|ū_i| ≤ bound`.
///
/// LP in the split variables `ū = p − q`, `p, q ≥ 0`, with slack `s` for the
/// bound rows `p + q + s = bound`.
pub fn min_fuel(
    cmat: &DMatrix<f64>,
    x: &DVector<f64>,
    input_bound: Option<f64>,
    opts: &SolverOptions,
) -> SolveResult {
    check_shapes(cmat, x);
    let len = cmat.ncols();
    if !in_range(cmat, x, opts.rank_tol) {
        return SolveResult::infeasible(len);
    }
    let extra = if input_bound.is_some() { len } else { 0 };
    let sol = lp_with_fallback(cmat, x, opts, |eq, rhs| {
        let rows = eq.nrows();
        let vars = 2 * len + extra;
        let mut a = DMatrix::zeros(rows + extra, vars);
        a.view_mut((0, 0), (rows, len)).copy_from(eq);
        a.view_mut((0, len), (rows, len)).copy_from(&(-eq));
        let mut b = DVector::zeros(rows + extra);
        b.rows_mut(0, rows).copy_from(rhs);
        if let Some(bound) = input_bound {
            for i in 0..len {
                a[(rows + i, i)] = 1.0;
                a[(rows + i, len + i)] = 1.0;
                a[(rows + i, 2 * len + i)] = 1.0;
                b[rows + i] = bound;
            }
        }
        let mut c = DVector::zeros(vars);
        c.rows_mut(0, 2 * len).fill(1.0);
        (a, b, c)
    });
    let Some(sol) = sol else {
        return SolveResult::infeasible(len);
    };
    let u = sol.x.rows(0, len) - sol.x.rows(len, len);
    finish_lp(cmat, x, u.lp_norm(1), u, &sol)
}

/// Minimum ∞-norm input reaching `x`.
///
/// LP in `(p, q, s, w) ≥ 0`: `C(p − q) = x`, `p_i + q_i − s + w_i = 0`,
/// minimizing `s`.
pub fn min_inf_norm(cmat: &DMatrix<f64>, x: &DVector<f64>, opts: &SolverOptions) -> SolveResult {
    check_shapes(cmat, x);
    let len = cmat.ncols();
    if !in_range(cmat, x, opts.rank_tol) {
        return SolveResult::infeasible(len);
    }
    if x.iter().all(|&v| v == 0.0) {
        return SolveResult {
            input: DVector::zeros(len),
            value: 0.0,
            status: SolveStatus::Optimal,
            residual: 0.0,
            certificate: None,
        };
    }
    let sol = lp_with_fallback(cmat, x, opts, |eq, rhs| {
        let rows = eq.nrows();
        let vars = 3 * len + 1;
        let s_col = 2 * len;
        let mut a = DMatrix::zeros(rows + len, vars);
        a.view_mut((0, 0), (rows, len)).copy_from(eq);
        a.view_mut((0, len), (rows, len)).copy_from(&(-eq));
        for i in 0..len {
            a[(rows + i, i)] = 1.0;
            a[(rows + i, len + i)] = 1.0;
            a[(rows + i, s_col)] = -1.0;
            a[(rows + i, s_col + 1 + i)] = 1.0;
        }
        let mut b = DVector::zeros(rows + len);
        b.rows_mut(0, rows).copy_from(rhs);
        let mut c = DVector::zeros(vars);
        c[s_col] = 1.0;
        (a, b, c)
    });
    let Some(sol) = sol else {
        return SolveResult::infeasible(len);
    };
    let u = sol.x.rows(0, len) - sol.x.rows(len, len);
    finish_lp(cmat, x, u.amax(), u, &sol)
}

fn finish_lp(
    cmat: &DMatrix<f64>,
    x: &DVector<f64>,
    value: f64,
    u: DVector<f64>,
    sol: &LpSolution,
) -> SolveResult {
    SolveResult {
        value,
        residual: residual(cmat, &u, x),
        input: u,
        status: SolveStatus::Optimal,
        certificate: Some(DualCertificate {
            dual_value: sol.dual_objective,
            relative_gap: sol.relative_gap,
            dual_infeasibility: sol.dual_infeasibility,
        }),
    }
}

/// Minimizes `γ₁‖ū‖₁ + γ₂‖ū‖₂` (the 2-norm itself, not squared) by
/// operator splitting. See [`admm`].
pub fn min_fuel_energy(
    cmat: &DMatrix<f64>,
    x: &DVector<f64>,
    gamma1: f64,
    gamma2: f64,
    opts: &SolverOptions,
) -> SolveResult {
    check_shapes(cmat, x);
    assert!(
        gamma1 >= 0.0 && gamma2 >= 0.0 && gamma1 + gamma2 > 0.0,
        "weights must be nonnegative and not both zero"
    );
    if !in_range(cmat, x, opts.rank_tol) {
        return SolveResult::infeasible(cmat.ncols());
    }
    admm::solve(cmat, x, gamma1, gamma2, opts.rank_tol, &opts.admm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, v.len(), v)
    }

    fn vec1(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn energy_examples() {
        let r = min_energy(&row(&[2.0, 1.0]), &vec1(1.0), &opts());
        assert!(r.is_optimal());
        assert!((r.input[0] - 0.4).abs() < 1e-12 && (r.input[1] - 0.2).abs() < 1e-12);
        assert!((r.value - 1.0 / 5f64.sqrt()).abs() < 1e-12);

        let xf = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let r = min_energy(&DMatrix::identity(3, 3), &xf, &opts());
        assert!((r.input - &xf).norm() < 1e-12);

        let r = min_energy(&DMatrix::zeros(2, 3), &DVector::from_vec(vec![1.0, 0.0]), &opts());
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn fuel_examples() {
        let r = min_fuel(&row(&[2.0, 1.0]), &vec1(1.0), None, &opts());
        assert!(r.is_optimal());
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!((r.input[0] - 0.5).abs() < 1e-12 && r.input[1].abs() < 1e-12);

        let r = min_fuel(&row(&[1.0, 1.0]), &vec1(1.0), None, &opts());
        assert!((r.value - 1.0).abs() < 1e-12);

        let r = min_fuel(&row(&[2.0, 1.0]), &vec1(1.0), Some(0.1), &opts());
        assert_eq!(r.status, SolveStatus::Infeasible);

        let r = min_fuel(&row(&[2.0, 1.0]), &vec1(1.0), Some(0.4), &opts());
        assert!(r.is_optimal());
        assert!((r.value - 0.6).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn fuel_vertex_enumeration() {
        // single row: the LP optimum is attained at a one-column vertex
        let c = [2.0, 1.0, -3.0, 0.5];
        let best = c.iter().map(|v: &f64| 1.0 / v.abs()).fold(f64::INFINITY, f64::min);
        let r = min_fuel(&row(&c), &vec1(1.0), None, &opts());
        assert!((r.value - best).abs() < 1e-12);
    }

    #[test]
    fn inf_norm_examples() {
        let r = min_inf_norm(&row(&[2.0, 1.0]), &vec1(3.0), &opts());
        assert!(r.is_optimal());
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.input[0] - 1.0).abs() < 1e-9 && (r.input[1] - 1.0).abs() < 1e-9);

        let b = DVector::from_vec(vec![0.5, -2.0, 1.5]);
        let r = min_inf_norm(&DMatrix::identity(3, 3), &b, &opts());
        assert!((r.value - 2.0).abs() < 1e-12);

        let r = min_inf_norm(&DMatrix::zeros(1, 2), &vec1(1.0), &opts());
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn fuel_energy_examples() {
        let o = opts();
        let r = min_fuel_energy(&row(&[2.0, 1.0]), &vec1(1.0), 0.0, 1.0, &o);
        assert!(r.is_optimal());
        assert!((r.value - 1.0 / 5f64.sqrt()).abs() < 1e-7, "{}", r.value);

        let r = min_fuel_energy(&row(&[2.0, 1.0]), &vec1(1.0), 1.0, 0.0, &o);
        assert!(r.is_optimal());
        assert!((r.value - 0.5).abs() < 1e-6, "{}", r.value);

        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let r = min_fuel_energy(&DMatrix::identity(3, 3), &e1, 1.0, 1.0, &o);
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!((r.input - e1).norm() < 1e-9);

        let r = min_fuel_energy(&DMatrix::zeros(1, 2), &vec1(1.0), 1.0, 1.0, &o);
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn range_test() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(in_range(&c, &DVector::from_vec(vec![1.0, 2.0]), RankTolerance::Default));
        assert!(!in_range(&c, &DVector::from_vec(vec![1.0, 0.0]), RankTolerance::Default));
        assert!(in_range(&DMatrix::zeros(2, 2), &DVector::zeros(2), RankTolerance::Default));
    }
}
