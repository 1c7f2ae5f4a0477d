//! Dense two-phase simplex for `min cᵀx  s.t.  A x = b, x ≥ 0`.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving variable among ratio ties), so the method cannot cycle and always
//! lands on the same vertex for the same data. Rows and columns are
//! equilibrated and linearly dependent rows dropped before the tableau is
//! built. The tableau is rebuilt from an LU factorization of the basis every
//! few dozen pivots and before any terminal verdict is accepted. After the
//! solve a dual vector is recomputed from the final basis against the
//! *original* data, and the duality gap and dual infeasibility are reported
//! alongside the primal.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: DVector<f64>,
    /// Multipliers of the equality rows (original scaling and signs).
    pub y: DVector<f64>,
    pub objective: f64,
    /// `bᵀy`
    pub dual_objective: f64,
    /// `|cᵀx − bᵀy| / max(|cᵀx|, |bᵀy|)`, zero when both vanish.
    pub relative_gap: f64,
    /// `max_j (Aᵀy − c)_j`, clamped at zero.
    pub dual_infeasibility: f64,
    pub pivots: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Smallest pivot magnitude accepted (scaled tableau).
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality_tol: f64,
    /// Phase-one objective above which the problem is declared infeasible,
    /// relative to `max(1, ‖b‖∞)` after scaling.
    pub feasibility_tol: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-10,
            optimality_tol: 1e-11,
            feasibility_tol: 1e-9,
            max_pivots: 100_000,
        }
    }
}

const REINVERT_EVERY: usize = 32;

struct Tableau {
    // (rows + 1) x (cols + 1); last row is the objective, last column the rhs
    t: DMatrix<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    pivots: usize,
    since_reinvert: usize,
    // scaled data the tableau is rebuilt from; artificial column `n + i`
    // belongs to data row `i`
    a: DMatrix<f64>,
    b: DVector<f64>,
    cost: DVector<f64>,
}

impl Tableau {
    fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let (m, n) = a.shape();
        let cols = n + m;
        let mut cost = DVector::zeros(cols);
        cost.rows_mut(n, m).fill(1.0);
        let mut tab = Tableau {
            t: DMatrix::zeros(m + 1, cols + 1),
            rows: m,
            cols,
            basis: (n..n + m).collect(),
            pivots: 0,
            since_reinvert: 0,
            a,
            b,
            cost,
        };
        tab.reinvert();
        tab
    }

    fn structural(&self) -> usize {
        self.a.ncols()
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[(i, self.cols)]
    }

    /// Rebuilds `B⁻¹[A | I | b]` and the reduced-cost row from the data.
    /// Leaves the tableau untouched when the basis matrix is singular.
    fn reinvert(&mut self) -> bool {
        let (m, n) = (self.rows, self.structural());
        let width = self.cols + 1;
        let mut full = DMatrix::zeros(m, width);
        full.view_mut((0, 0), (m, n)).copy_from(&self.a);
        for i in 0..m {
            full[(i, n + i)] = 1.0;
            full[(i, self.cols)] = self.b[i];
        }
        let basis_matrix = full.select_columns(&self.basis);
        let Some(body) = basis_matrix.lu().solve(&full) else {
            return false;
        };
        if body.iter().any(|v| !v.is_finite()) {
            return false;
        }
        self.t.view_mut((0, 0), (m, width)).copy_from(&body);
        for (i, &j) in self.basis.iter().enumerate() {
            for r in 0..m {
                self.t[(r, j)] = if r == i { 1.0 } else { 0.0 };
            }
        }
        for j in 0..width {
            let base = if j < self.cols { self.cost[j] } else { 0.0 };
            let mut v = base;
            for (i, &bj) in self.basis.iter().enumerate() {
                v -= self.cost[bj] * self.t[(i, j)];
            }
            self.t[(m, j)] = v;
        }
        for &j in &self.basis {
            self.t[(m, j)] = 0.0;
        }
        self.since_reinvert = 0;
        true
    }

    fn set_costs(&mut self, cost: DVector<f64>) {
        self.cost = cost;
        if !self.reinvert() {
            let m = self.rows;
            for j in 0..=self.cols {
                let mut v = if j < self.cols { self.cost[j] } else { 0.0 };
                for (i, &bj) in self.basis.iter().enumerate() {
                    v -= self.cost[bj] * self.t[(i, j)];
                }
                self.t[(m, j)] = v;
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cols + 1;
        let p = self.t[(row, col)];
        for j in 0..width {
            self.t[(row, j)] /= p;
        }
        for i in 0..=self.rows {
            if i == row {
                continue;
            }
            let f = self.t[(i, col)];
            if f != 0.0 {
                for j in 0..width {
                    let v = self.t[(row, j)];
                    if v != 0.0 {
                        self.t[(i, j)] -= f * v;
                    }
                }
                self.t[(i, col)] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
        self.since_reinvert += 1;
    }

    fn leaving_row(&self, enter: usize, opts: &SimplexOptions) -> Option<usize> {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.t[(i, enter)];
            if a > opts.pivot_tol {
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        leave.map(|(r, _)| r)
    }

    /// Runs Bland pivots over columns `< allowed`. A verdict reached on a
    /// drifted tableau is re-checked after rebuilding it.
    fn optimize(&mut self, allowed: usize, opts: &SimplexOptions) -> LpStatus {
        let mut fresh = false;
        loop {
            if self.pivots >= opts.max_pivots {
                return LpStatus::IterationLimit;
            }
            if self.since_reinvert >= REINVERT_EVERY {
                fresh = self.reinvert();
            }
            let obj = self.rows;
            let enter = (0..allowed).find(|&j| self.t[(obj, j)] < -opts.optimality_tol);
            let leave = enter.map(|e| self.leaving_row(e, opts));
            match (enter, leave) {
                (Some(e), Some(Some(row))) => {
                    self.pivot(row, e);
                    fresh = false;
                }
                _ if !fresh => {
                    // a failed rebuild leaves nothing better to check against
                    fresh = true;
                    self.reinvert();
                }
                (None, _) => return LpStatus::Optimal,
                _ => return LpStatus::Unbounded,
            }
        }
    }
}

/// Rows of `a` kept by a greedy Gram-Schmidt sweep, or `None` when a
/// dependent row's right-hand side contradicts the kept ones.
fn independent_rows(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<Vec<usize>> {
    let tol = 1e-10 * a.amax().max(f64::MIN_POSITIVE);
    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut keep = Vec::new();
    let b_scale = b.amax().max(1.0);
    for i in 0..a.nrows() {
        let mut r = a.row(i).transpose();
        let mut rhs = b[i];
        for (q, qb) in &basis {
            let c = q.dot(&r);
            r -= q * c;
            rhs -= c * qb;
        }
        let norm = r.norm();
        if norm > tol {
            basis.push((r / norm, rhs / norm));
            keep.push(i);
        } else if rhs.abs() > 1e-9 * b_scale {
            return None;
        }
    }
    Some(keep)
}

/// Solves `min cᵀx` subject to `A x = b`, `x ≥ 0`.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, opts: &SimplexOptions) -> LpSolution {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "rhs length must match the row count");
    assert_eq!(c.len(), n, "cost length must match the column count");

    let failed = |status: LpStatus, pivots: usize| LpSolution {
        status,
        x: DVector::zeros(n),
        y: DVector::zeros(m),
        objective: f64::NAN,
        dual_objective: f64::NAN,
        relative_gap: f64::NAN,
        dual_infeasibility: f64::NAN,
        pivots,
    };

    // equilibrate: columns first, then rows; columns at round-off level
    // relative to the matrix are left unscaled
    let floor = a.amax() * 1e-12;
    let col_scale = DVector::from_fn(n, |j, _| {
        let mx = a.column(j).amax();
        if mx > floor && mx > 0.0 { 1.0 / mx } else { 1.0 }
    });
    let mut scaled = a.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(col_scale[j]);
    }
    let row_scale = DVector::from_fn(m, |i, _| {
        let mx = scaled.row(i).amax();
        if mx > 0.0 { 1.0 / mx } else { 1.0 }
    });
    for i in 0..m {
        scaled.row_mut(i).scale_mut(row_scale[i]);
    }
    let mut sb = b.component_mul(&row_scale);
    let sc = c.component_mul(&col_scale);
    for i in 0..m {
        if sb[i] < 0.0 {
            sb[i] = -sb[i];
            scaled.row_mut(i).neg_mut();
        }
    }
    let Some(rows) = independent_rows(&scaled, &sb) else {
        return failed(LpStatus::Infeasible, 0);
    };
    let scaled = scaled.select_rows(&rows);
    let sb = DVector::from_iterator(rows.len(), rows.iter().map(|&i| sb[i]));
    let m_kept = rows.len();

    // phase one: artificials in columns n..n+m_kept
    let mut tab = Tableau::new(scaled, sb.clone());
    let status = tab.optimize(n, opts);
    if status == LpStatus::IterationLimit {
        return failed(status, tab.pivots);
    }
    let infeasibility = -tab.t[(m_kept, tab.cols)];
    if infeasibility > opts.feasibility_tol * sb.amax().max(1.0) {
        return failed(LpStatus::Infeasible, tab.pivots);
    }

    // drive remaining artificials out of the basis
    for i in 0..m_kept {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n)
                .filter(|j| !tab.basis.contains(j))
                .max_by(|&p, &q| tab.t[(i, p)].abs().total_cmp(&tab.t[(i, q)].abs()))
                .filter(|&j| tab.t[(i, j)].abs() > opts.pivot_tol)
            {
                tab.pivot(i, j);
            }
        }
    }

    // phase two
    let mut cost = DVector::zeros(tab.cols);
    cost.rows_mut(0, n).copy_from(&sc);
    tab.set_costs(cost);
    let status = tab.optimize(n, opts);
    if status != LpStatus::Optimal {
        return failed(status, tab.pivots);
    }

    // primal in original coordinates
    let mut x = DVector::zeros(n);
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < n {
            x[j] = tab.rhs(i).max(0.0) * col_scale[j];
        }
    }
    refine_basic(a, b, &tab.basis, n, &mut x);

    // dual from the final basis, against the unscaled data
    let basic: Vec<usize> = tab.basis.iter().copied().filter(|&j| j < n).collect();
    let y = if basic.is_empty() {
        DVector::zeros(m)
    } else {
        let ab = a.select_columns(&basic);
        let cb = DVector::from_iterator(basic.len(), basic.iter().map(|&j| c[j]));
        ab.transpose()
            .svd(true, true)
            .solve(&cb, f64::EPSILON * m.max(basic.len()) as f64)
            .unwrap_or_else(|_| DVector::zeros(m))
    };
    let objective = c.dot(&x);
    let dual_objective = b.dot(&y);
    let reduced = c - a.transpose() * &y;
    let dual_infeasibility = reduced.iter().fold(0.0f64, |acc, &r| acc.max(-r));
    let magnitude = objective.abs().max(dual_objective.abs());
    LpSolution {
        status: LpStatus::Optimal,
        relative_gap: if magnitude > 0.0 {
            (objective - dual_objective).abs() / magnitude
        } else {
            0.0
        },
        x,
        y,
        objective,
        dual_objective,
        dual_infeasibility,
        pivots: tab.pivots,
    }
}

/// Re-solves the basic block against the original data. Keeps the tableau
/// values when the refined point would leave the nonnegative orthant or
/// fails to reduce the residual.
fn refine_basic(a: &DMatrix<f64>, b: &DVector<f64>, basis: &[usize], n: usize, x: &mut DVector<f64>) {
    let basic: Vec<usize> = basis.iter().copied().filter(|&j| j < n).collect();
    if basic.is_empty() {
        return;
    }
    let ab = a.select_columns(&basic);
    let Ok(xb) = ab.clone().svd(true, true).solve(b, f64::EPSILON * basic.len() as f64) else {
        return;
    };
    let scale = xb.amax().max(1.0);
    if xb.iter().any(|&v| v < -1e-9 * scale) {
        return;
    }
    let old_res = (a * &*x - b).norm();
    let mut candidate = DVector::zeros(n);
    for (k, &j) in basic.iter().enumerate() {
        candidate[j] = xb[k].max(0.0);
    }
    if (a * &candidate - b).norm() <= old_res {
        *x = candidate;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: &[f64], rows: usize, b: &[f64], c: &[f64]) -> LpSolution {
        let a = DMatrix::from_row_slice(rows, c.len(), a);
        solve(&a, &DVector::from_row_slice(b), &DVector::from_row_slice(c), &SimplexOptions::default())
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  (optimum 36 at (2, 6))
        let sol = lp(
            &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0, 3.0, 2.0, 0.0, 0.0, 1.0],
            3,
            &[4.0, 12.0, 18.0],
            &[-3.0, -5.0, 0.0, 0.0, 0.0],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
        assert!(sol.relative_gap < 1e-12);
        assert!(sol.dual_infeasibility < 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        // x1 + x2 = -1 with x >= 0
        let sol = lp(&[1.0, 1.0], 1, &[-1.0], &[1.0, 1.0]);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        // min -x1 s.t. x1 - x2 = 0
        let sol = lp(&[1.0, -1.0], 1, &[0.0], &[-1.0, 0.0]);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let sol = lp(&[1.0, 1.0, 2.0, 2.0], 2, &[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert!(sol.relative_gap < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example, converted to equality form with slacks
        let a = [
            0.25, -8.0, -1.0, 9.0, 1.0, 0.0, 0.0, //
            0.5, -12.0, -0.5, 3.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
        ];
        let sol = lp(&a, 3, &[0.0, 0.0, 1.0], &[-0.75, 20.0, -0.5, 6.0, 0.0, 0.0, 0.0]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.25).abs() < 1e-10);
    }
}
