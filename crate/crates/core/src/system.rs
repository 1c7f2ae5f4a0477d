//! The switched linear system `x(t+1) = A x(t) + σ(t) B u(t)`,
//! `y(t) = C x(t)` when `σ(t) = 1`, and its signal-dependent
//! controllability/observability matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::automata::Signal;
use crate::error::{Error, Result};
use crate::matrix_io::MatrixJson;

/// Ratio of smallest to largest singular value of `A` below which the state
/// matrix is treated as singular.
pub const INVERTIBILITY_RATIO: f64 = 1e-12;

/// Threshold rule for counting singular values.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub enum RankTolerance {
    /// `max(rows, cols) · ε · σ_max`
    #[default]
    Default,
    /// `factor · σ_max`
    Relative(f64),
}

impl RankTolerance {
    pub fn threshold(self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match self {
            RankTolerance::Default => rows.max(cols) as f64 * f64::EPSILON * sigma_max,
            RankTolerance::Relative(factor) => factor * sigma_max,
        }
    }
}

/// Number of singular values above the tolerance.
pub fn numerical_rank(m: &DMatrix<f64>, tol: RankTolerance) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let sigma_max = sv.max();
    if sigma_max == 0.0 {
        return 0;
    }
    let threshold = tol.threshold(m.nrows(), m.ncols(), sigma_max);
    sv.iter().filter(|&&s| s > threshold).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwitchedLinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `x(0) … x(T)`
    pub states: Vec<DVector<f64>>,
    /// `y(0) … y(T-1)`; `None` at dropout instants.
    pub outputs: Vec<Option<DVector<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gramian {
    pub w: DMatrix<f64>,
    pub horizon: usize,
}

impl SwitchedLinearSystem {
    /// Checks dimensions and that `A` is invertible.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::Dimension(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "B must be {n}xm with m >= 1, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "C must be px{n} with p >= 1, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Dimension("system matrices must be finite".into()));
        }
        let sv = a.singular_values();
        let ratio = sv.min() / sv.max();
        if !(ratio > INVERTIBILITY_RATIO) {
            return Err(Error::SingularStateMatrix { ratio });
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// `A^0 … A^count-1` by repeated multiplication.
    pub fn a_powers(&self, count: usize) -> Vec<DMatrix<f64>> {
        let mut powers = Vec::with_capacity(count);
        let mut cur = DMatrix::identity(self.n(), self.n());
        for _ in 0..count {
            let next = &self.a * &cur;
            powers.push(cur);
            cur = next;
        }
        powers
    }

    pub fn simulate(
        &self,
        signal: &Signal,
        x0: &DVector<f64>,
        inputs: &[DVector<f64>],
    ) -> Result<Trajectory> {
        if inputs.len() != signal.len() {
            return Err(Error::Dimension(format!(
                "{} inputs for a signal of length {}",
                inputs.len(),
                signal.len()
            )));
        }
        if x0.len() != self.n() {
            return Err(Error::Dimension(format!(
                "initial state has length {}, expected {}",
                x0.len(),
                self.n()
            )));
        }
        if let Some(u) = inputs.iter().find(|u| u.len() != self.m()) {
            return Err(Error::Dimension(format!(
                "input has length {}, expected {}",
                u.len(),
                self.m()
            )));
        }
        let mut states = Vec::with_capacity(signal.len() + 1);
        let mut outputs = Vec::with_capacity(signal.len());
        let mut x = x0.clone();
        for (t, u) in inputs.iter().enumerate() {
            let on = signal.get(t);
            outputs.push(on.then(|| &self.c * &x));
            let mut next = &self.a * &x;
            if on {
                next += &self.b * u;
            }
            states.push(std::mem::replace(&mut x, next));
        }
        states.push(x);
        Ok(Trajectory { states, outputs })
    }

    /// `[σ(0) A^{T-1} B, …, σ(T-2) A B, σ(T-1) B]`, so that
    /// `x(T) = A^T x(0) + C_σ ū`.
    pub fn controllability_matrix(&self, signal: &Signal) -> DMatrix<f64> {
        let len = signal.len();
        let (n, m) = (self.n(), self.m());
        let mut out = DMatrix::zeros(n, m * len);
        let mut block = self.b.clone();
        for j in (0..len).rev() {
            if signal.get(j) {
                out.view_mut((0, j * m), (n, m)).copy_from(&block);
            }
            if j > 0 {
                block = &self.a * &block;
            }
        }
        out
    }

    /// Stacked blocks `σ(i) C A^i`, `i = 0 … T-1`.
    pub fn observability_matrix(&self, signal: &Signal) -> DMatrix<f64> {
        let len = signal.len();
        let (n, p) = (self.n(), self.p());
        let mut out = DMatrix::zeros(p * len, n);
        let mut block = self.c.clone();
        for i in 0..len {
            if signal.get(i) {
                out.view_mut((i * p, 0), (p, n)).copy_from(&block);
            }
            block = &block * &self.a;
        }
        out
    }

    /// `W = C_σ C_σᵀ`.
    pub fn reachability_gramian(&self, signal: &Signal) -> Gramian {
        let cm = self.controllability_matrix(signal);
        let w = &cm * cm.transpose();
        Gramian {
            w: (&w + w.transpose()) * 0.5,
            horizon: signal.len(),
        }
    }

    /// Smallest index `t` for which the observability matrix over
    /// `σ(0..=t)` has rank `n`, or `None` if that never happens within the
    /// signal.
    pub fn first_full_rank_time(&self, signal: &Signal, tol: RankTolerance) -> Option<usize> {
        let (n, p) = (self.n(), self.p());
        let mut rows: Vec<DMatrix<f64>> = Vec::new();
        let mut block = self.c.clone();
        for t in 0..signal.len() {
            if signal.get(t) {
                rows.push(block.clone());
                if rows.len() * p >= n {
                    let stacked = DMatrix::from_fn(rows.len() * p, n, |r, c| rows[r / p][(r % p, c)]);
                    if numerical_rank(&stacked, tol) == n {
                        return Some(t);
                    }
                }
            }
            block = &block * &self.a;
        }
        None
    }

    /// Controllability and observability under the all-ones signal of the
    /// given length.
    pub fn is_controllable_and_observable(&self, len: usize, tol: RankTolerance) -> bool {
        let ones = Signal::ones(len);
        numerical_rank(&self.controllability_matrix(&ones), tol) == self.n()
            && numerical_rank(&self.observability_matrix(&ones), tol) == self.n()
    }
}

/// JSON form: `{"A": matrix, "B": matrix, "C": matrix}` with each matrix in
/// the [`MatrixJson`] layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemJson {
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "B")]
    pub b: MatrixJson,
    #[serde(rename = "C")]
    pub c: MatrixJson,
}

impl SystemJson {
    pub fn to_system(&self) -> Result<SwitchedLinearSystem> {
        SwitchedLinearSystem::new(self.a.to_matrix()?, self.b.to_matrix()?, self.c.to_matrix()?)
    }
}

impl From<&SwitchedLinearSystem> for SystemJson {
    fn from(sys: &SwitchedLinearSystem) -> Self {
        SystemJson {
            a: MatrixJson::from(sys.a()),
            b: MatrixJson::from(sys.b()),
            c: MatrixJson::from(sys.c()),
        }
    }
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(s: &str) -> Signal {
        s.parse().unwrap()
    }

    fn scalar(a: f64, b: f64, c: f64) -> SwitchedLinearSystem {
        SwitchedLinearSystem::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
        )
        .unwrap()
    }

    #[test]
    fn rejects_singular_a() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let err = SwitchedLinearSystem::new(a, DMatrix::identity(2, 1), DMatrix::identity(1, 2));
        assert!(matches!(err, Err(Error::SingularStateMatrix { .. })));
    }

    #[test]
    fn rejects_bad_dimensions() {
        let err = SwitchedLinearSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(3, 1),
            DMatrix::identity(1, 2),
        );
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn simulate_drops_inputs() {
        let sys = SwitchedLinearSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let traj = sys
            .simulate(&sig("10"), &DVector::zeros(2), &[e1.clone(), e1.clone()])
            .unwrap();
        assert_eq!(traj.states[2], e1);
        assert!(traj.outputs[0].is_some());
        assert!(traj.outputs[1].is_none());
    }

    #[test]
    fn simulate_scalar_cases() {
        let sys = scalar(2.0, 1.0, 1.0);
        let zero = DVector::from_element(1, 0.0);
        let traj = sys
            .simulate(&sig("11"), &DVector::from_element(1, 1.0), &[zero.clone(), zero])
            .unwrap();
        assert_eq!(traj.states[2][0], 4.0);

        let u = [DVector::from_element(1, 5.0), DVector::from_element(1, 1.0)];
        let traj = sys.simulate(&sig("01"), &DVector::zeros(1), &u).unwrap();
        assert_eq!(traj.states[2][0], 1.0);
    }

    #[test]
    fn simulate_rejects_length_mismatch() {
        let sys = scalar(2.0, 1.0, 1.0);
        assert!(sys
            .simulate(&sig("11"), &DVector::zeros(1), &[DVector::zeros(1)])
            .is_err());
    }

    #[test]
    fn controllability_scalar() {
        let sys = scalar(2.0, 1.0, 1.0);
        let cm = sys.controllability_matrix(&sig("11"));
        assert_eq!(cm, DMatrix::from_row_slice(1, 2, &[2.0, 1.0]));
        assert_eq!(sys.controllability_matrix(&sig("000")), DMatrix::zeros(1, 3));
    }

    #[test]
    fn observability_scalar() {
        let sys = scalar(2.0, 1.0, 1.0);
        assert_eq!(
            sys.observability_matrix(&sig("101")),
            DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 4.0])
        );
    }

    #[test]
    fn observability_kernel_gives_identical_outputs() {
        // C = [1 0], A = I: x0 = e2 is invisible
        let sys = SwitchedLinearSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 1),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        )
        .unwrap();
        let s = sig("111");
        let x0 = DVector::from_vec(vec![0.0, 1.0]);
        assert!((sys.observability_matrix(&s) * &x0).norm() == 0.0);
        let u = vec![DVector::zeros(1); 3];
        let a = sys.simulate(&s, &x0, &u).unwrap();
        let b = sys.simulate(&s, &DVector::zeros(2), &u).unwrap();
        assert_eq!(a.outputs, b.outputs);
    }

    #[test]
    fn gramian_cases() {
        let sys = SwitchedLinearSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!(sys.reachability_gramian(&sig("111")).w, DMatrix::identity(2, 2) * 3.0);
        let w = scalar(2.0, 1.0, 1.0).reachability_gramian(&sig("01")).w;
        assert_eq!(w[(0, 0)], 1.0);
    }

    #[test]
    fn rank_cases() {
        assert_eq!(numerical_rank(&DMatrix::identity(4, 4), RankTolerance::Default), 4);
        assert_eq!(numerical_rank(&DMatrix::zeros(3, 2), RankTolerance::Default), 0);
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(numerical_rank(&ones, RankTolerance::Default), 1);
        let nearly = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
        assert_eq!(numerical_rank(&nearly, RankTolerance::Default), 2);
        assert_eq!(numerical_rank(&nearly, RankTolerance::Relative(1e-6)), 1);
    }

    #[test]
    fn first_full_rank_cases() {
        let sys = scalar(2.0, 1.0, 1.0);
        assert_eq!(sys.first_full_rank_time(&sig("01"), RankTolerance::Default), Some(1));
        assert_eq!(sys.first_full_rank_time(&sig("000"), RankTolerance::Default), None);
        // classical: n = 3, p = 1 chain observed at the end
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let c = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let sys = SwitchedLinearSystem::new(a, DMatrix::identity(3, 1), c).unwrap();
        assert_eq!(sys.first_full_rank_time(&Signal::ones(5), RankTolerance::Default), Some(2));
    }

    #[test]
    fn powers() {
        let sys = scalar(3.0, 1.0, 1.0);
        let p: Vec<f64> = sys.a_powers(4).iter().map(|m| m[(0, 0)]).collect();
        assert_eq!(p, vec![1.0, 3.0, 9.0, 27.0]);
    }
}
