//! Finite-horizon LQR under dropouts.
//!
//! With the signal fixed, `x(t+1) = A x(t) + σ(t) B u(t)` is time varying and
//! the optimal cost-to-go matrices follow the backward recursion
//!
//! ```text
//! P(T) = Q_f
//! P(t) = Q + AᵀP(t+1)A − σ(t) AᵀP(t+1)B (R + BᵀP(t+1)B)⁻¹ BᵀP(t+1)A
//! ```
//!
//! A dropout step reduces to the Lyapunov update `Q + AᵀP A`.

use nalgebra::{DMatrix, DVector};

use crate::automata::Signal;
use crate::error::{Error, Result};
use crate::system::{min_symmetric_eigenvalue, SwitchedLinearSystem};

const SYMMETRY_TOL: f64 = 1e-10;
const SIGN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LqrWeights {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    qf: DMatrix<f64>,
    horizon: usize,
}

impl LqrWeights {
    /// `Q ⪰ 0`, `R ≻ 0`, `Q_f ≻ 0`, all symmetric; `horizon ≥ 1`.
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>, qf: DMatrix<f64>, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidWeights("horizon must be >= 1".into()));
        }
        for (name, m) in [("Q", &q), ("R", &r), ("Q_f", &qf)] {
            if !m.is_square() || m.is_empty() {
                return Err(Error::InvalidWeights(format!("{name} must be square and nonempty")));
            }
            let scale = m.amax().max(1.0);
            if (m - m.transpose()).amax() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidWeights(format!("{name} is not symmetric")));
            }
        }
        if q.nrows() != qf.nrows() {
            return Err(Error::InvalidWeights("Q and Q_f sizes differ".into()));
        }
        let q_min = min_symmetric_eigenvalue(&q);
        if q_min < -SIGN_TOL * q.amax().max(1.0) {
            return Err(Error::InvalidWeights(format!("Q has eigenvalue {q_min:e} < 0")));
        }
        for (name, m) in [("R", &r), ("Q_f", &qf)] {
            let lo = min_symmetric_eigenvalue(m);
            if lo <= SIGN_TOL * m.amax() {
                return Err(Error::InvalidWeights(format!(
                    "{name} must be positive definite (smallest eigenvalue {lo:e})"
                )));
            }
        }
        Ok(Self { q, r, qf, horizon })
    }

    /// `Q = I`, `R = I`, `Q_f = I`.
    pub fn identity(n: usize, m: usize, horizon: usize) -> Result<Self> {
        Self::new(
            DMatrix::identity(n, n),
            DMatrix::identity(m, m),
            DMatrix::identity(n, n),
            horizon,
        )
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn qf(&self) -> &DMatrix<f64> {
        &self.qf
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn check(&self, sys: &SwitchedLinearSystem) -> Result<()> {
        if self.q.nrows() != sys.n() || self.r.nrows() != sys.m() {
            return Err(Error::Dimension(format!(
                "weights are for n={}, m={} but the system has n={}, m={}",
                self.q.nrows(),
                self.r.nrows(),
                sys.n(),
                sys.m()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSolution {
    /// `P(0) … P(T)`
    pub p: Vec<DMatrix<f64>>,
}

impl RiccatiSolution {
    pub fn initial(&self) -> &DMatrix<f64> {
        &self.p[0]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainSchedule {
    /// `K(0) … K(T-1)`
    pub k: Vec<DMatrix<f64>>,
}

fn check_signal(signal: &Signal, w: &LqrWeights) -> Result<()> {
    if signal.len() != w.horizon {
        return Err(Error::Dimension(format!(
            "signal length {} does not match horizon {}",
            signal.len(),
            w.horizon
        )));
    }
    Ok(())
}

/// `(R + BᵀPB)⁻¹ BᵀPA` via a linear solve.
fn feedback_term(sys: &SwitchedLinearSystem, w: &LqrWeights, p: &DMatrix<f64>) -> DMatrix<f64> {
    let bt_p = sys.b().transpose() * p;
    let lhs = &w.r + &bt_p * sys.b();
    let rhs = &bt_p * sys.a();
    lhs.clone()
        .cholesky()
        .map(|ch| ch.solve(&rhs))
        .or_else(|| lhs.lu().solve(&rhs))
        .expect("R + BᵀPB is positive definite")
}

pub fn riccati_backward(
    sys: &SwitchedLinearSystem,
    signal: &Signal,
    w: &LqrWeights,
) -> Result<RiccatiSolution> {
    w.check(sys)?;
    check_signal(signal, w)?;
    let horizon = w.horizon;
    let mut p = vec![DMatrix::zeros(0, 0); horizon + 1];
    p[horizon] = w.qf.clone();
    for t in (0..horizon).rev() {
        let next = &p[t + 1];
        let at_p = sys.a().transpose() * next;
        let mut cur = &w.q + &at_p * sys.a();
        if signal.get(t) {
            let gain = feedback_term(sys, w, next);
            cur -= &at_p * sys.b() * gain;
        }
        p[t] = (&cur + cur.transpose()) * 0.5;
    }
    Ok(RiccatiSolution { p })
}

/// `x0ᵀ P(0) x0`
pub fn lqr_cost(sol: &RiccatiSolution, x0: &DVector<f64>) -> f64 {
    (x0.transpose() * sol.initial() * x0)[(0, 0)]
}

/// Optimal feedback for the dropout-free loop:
/// `K(t) = −(R + BᵀP(t+1)B)⁻¹ BᵀP(t+1)A`.
pub fn lti_gains(sys: &SwitchedLinearSystem, w: &LqrWeights) -> Result<GainSchedule> {
    let nominal = riccati_backward(sys, &Signal::ones(w.horizon), w)?;
    let k = (0..w.horizon)
        .map(|t| -feedback_term(sys, w, &nominal.p[t + 1]))
        .collect();
    Ok(GainSchedule { k })
}

/// Cost of running the fixed gains through the lossy loop
/// `x(t+1) = (A + σ(t) B K(t)) x(t)`, charged as
/// `x(T)ᵀQ_f x(T) + Σ x(t)ᵀ(Q + K(t)ᵀR K(t))x(t)`.
pub fn degraded_cost(
    sys: &SwitchedLinearSystem,
    gains: &GainSchedule,
    signal: &Signal,
    w: &LqrWeights,
    x0: &DVector<f64>,
) -> Result<f64> {
    w.check(sys)?;
    check_signal(signal, w)?;
    if gains.k.len() != w.horizon {
        return Err(Error::Dimension("gain schedule length does not match horizon".into()));
    }
    if x0.len() != sys.n() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, expected {}",
            x0.len(),
            sys.n()
        )));
    }
    let mut x = x0.clone();
    let mut cost = 0.0;
    for (t, k) in gains.k.iter().enumerate() {
        let u = k * &x;
        cost += x.dot(&(&w.q * &x)) + u.dot(&(&w.r * &u));
        let mut next = sys.a() * &x;
        if signal.get(t) {
            next += sys.b() * u;
        }
        x = next;
    }
    cost += x.dot(&(&w.qf * &x));
    Ok(cost)
}
