//! Convex quadratic programs with nonnegativity bounds,
//! `min ½xᵀQx + bᵀx s.t. x ≥ 0`, solved by projected gradient on `x` and
//! by scaled gradient descent on the substitution `x = v⊙v`.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vector, DenseMatrix, HouseholderQr};
use crate::optcert::bc_prox_residual;
use crate::rng;
use crate::trace::SolveTrace;

const SHRINK: f64 = 0.5;
const GROW: f64 = 1.5;
const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;
const SCALING_SWITCH: f64 = 0.1;
const MIN_SCALING: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BcqpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid starting point: {0}")]
    InvalidStart(String),
}

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub q: DenseMatrix,
    pub b: Vec<f64>,
    pub x_ref: Vec<f64>,
    pub kappa: f64,
}

impl QpProblem {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        vector::add(&self.q.matvec(x), &self.b)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let qx = self.q.matvec(x);
        0.5 * vector::dot(x, &qx) + vector::dot(&self.b, x)
    }

    /// Objective and gradient sharing one product with `Q`.
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let qx = self.q.matvec(x);
        let f = 0.5 * vector::dot(x, &qx) + vector::dot(&self.b, x);
        (f, vector::add(&qx, &self.b))
    }

    /// `F(v) = f(v⊙v)` and `∇F(v) = 2v⊙∇f(v⊙v)`.
    pub fn dss_value_grad(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let (f, g) = self.value_grad(&vector::square(v));
        (f, crate::optcert::dss_grad(&g, v))
    }
}

/// Random QP with eigenvalues log-uniform on `[1/κ, 1]`, random orthogonal
/// eigenvectors and unconstrained minimizer `x_ref ~ N(0, I)`.
pub fn gen_qp(n: usize, kappa: f64, seed: u64) -> QpProblem {
    assert!(n >= 1, "n must be positive");
    assert!(kappa >= 1.0, "kappa must be at least 1");
    let mut rng = rng::stream(seed, rng::STREAM_QP);
    let q = if kappa == 1.0 {
        DenseMatrix::identity(n)
    } else {
        let log_k = kappa.ln();
        let eig: Vec<f64> = rng::uniform_vec(&mut rng, n, -log_k, 0.0)
            .into_iter()
            .map(f64::exp)
            .collect();
        let g = DenseMatrix::from_row_major(n, n, rng::normal_vec(&mut rng, n * n)).expect("square buffer");
        let u = HouseholderQr::new(&g).q_columns(0);
        let ud = DenseMatrix::from_fn(n, n, |i, j| u[(i, j)] * eig[j]);
        ud.matmul(&u.transpose()).symmetrize()
    };
    let x_ref = rng::normal_vec(&mut rng, n);
    let b = vector::scale(&q.matvec(&x_ref), -1.0);
    QpProblem { q, b, x_ref, kappa }
}

/// Common start `max(φ, 0) + 1` with `φ ~ N(0, 1)`; the DSS start is its square root.
pub fn standard_start(n: usize, seed: u64) -> Vec<f64> {
    rng::normal_vec(&mut rng::stream(seed, rng::STREAM_INIT), n)
        .into_iter()
        .map(|p| p.max(0.0) + 1.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Require sufficient decrease instead of simple decrease in backtracking.
    pub armijo: bool,
}

impl Default for BcOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 100_000,
            armijo: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BcStatus {
    Converged,
    MaxIterReached,
    /// Backtracking could not find a decreasing step.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct BcSolveResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub prox_residual: f64,
    pub status: BcStatus,
    pub trace: SolveTrace,
}

const TRACE_COLUMNS: [&str; 3] = ["obj", "prox_residual", "alpha"];

fn prox(x: &[f64], g: &[f64]) -> f64 {
    bc_prox_residual(g, x).expect("iterate is nonnegative")
}

pub fn pg_solve(p: &QpProblem, x0: &[f64], opts: BcOptions) -> Result<BcSolveResult, BcqpError> {
    let n = p.n();
    if x0.len() != n {
        return Err(BcqpError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if x0.iter().any(|xi| !(*xi >= 0.0)) {
        return Err(BcqpError::InvalidStart("x0 must be nonnegative".into()));
    }
    let mut x = x0.to_vec();
    let (mut f, mut g) = p.value_grad(&x);
    let mut alpha = 1.0;
    let mut trace = SolveTrace::new(&TRACE_COLUMNS);
    let mut iterations = 0;
    let status = loop {
        let res = prox(&x, &g);
        if res <= opts.tol {
            break BcStatus::Converged;
        }
        if iterations >= opts.max_iter {
            break BcStatus::MaxIterReached;
        }
        let accepted = loop {
            let x_new: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| (xi - alpha * gi).max(0.0)).collect();
            let (f_new, g_new) = p.value_grad(&x_new);
            let bound = if opts.armijo {
                f + ARMIJO_C * vector::dot(&g, &vector::sub(&x_new, &x))
            } else {
                f
            };
            if f_new < bound {
                break Some((x_new, f_new, g_new));
            }
            alpha *= SHRINK;
            if alpha < MIN_STEP {
                break None;
            }
        };
        let Some((x_new, f_new, g_new)) = accepted else {
            break BcStatus::Stalled;
        };
        x = x_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        trace.push(iterations, vec![f, prox(&x, &g), alpha]);
        alpha *= GROW;
    };
    let prox_residual = prox(&x, &g);
    Ok(BcSolveResult {
        x,
        iterations,
        objective: f,
        prox_residual,
        status,
        trace,
    })
}

/// Diagonal of `∇²F(v) = 2 diag(∇f) + 4 V Q V`.
fn dss_hess_diag(p: &QpProblem, g: &[f64], v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|i| 2.0 * g[i] + 4.0 * v[i] * v[i] * p.q[(i, i)])
        .collect()
}

pub fn dss_gd_scaled_solve(p: &QpProblem, v0: &[f64], opts: BcOptions) -> Result<BcSolveResult, BcqpError> {
    let n = p.n();
    if v0.len() != n {
        return Err(BcqpError::DimensionMismatch {
            expected: n,
            got: v0.len(),
        });
    }
    if let Some(i) = v0.iter().position(|vi| *vi == 0.0 || !vi.is_finite()) {
        return Err(BcqpError::InvalidStart(format!(
            "v0[{i}] = {} (gradient descent never moves a zero component)",
            v0[i]
        )));
    }
    let mut v = v0.to_vec();
    let mut x = vector::square(&v);
    let (mut f, mut g) = p.value_grad(&x);
    let mut alpha = 1.0;
    let mut trace = SolveTrace::new(&TRACE_COLUMNS);
    let mut iterations = 0;
    let status = loop {
        if prox(&x, &g) <= opts.tol {
            break BcStatus::Converged;
        }
        if iterations >= opts.max_iter {
            break BcStatus::MaxIterReached;
        }
        let grad_f = crate::optcert::dss_grad(&g, &v);
        let grad_norm = vector::norm2(&grad_f);

        let mut step = None;
        if grad_norm <= SCALING_SWITCH {
            let mut d = dss_hess_diag(p, &g, &v);
            let lambda = (MIN_SCALING - d.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
            d.iter_mut().for_each(|di| *di += lambda);
            let v_new: Vec<f64> = (0..n).map(|i| v[i] - grad_f[i] / d[i]).collect();
            let x_new = vector::square(&v_new);
            let (f_new, g_new) = p.value_grad(&x_new);
            if f_new < f {
                step = Some((v_new, x_new, f_new, g_new, 1.0));
            }
        }
        if step.is_none() {
            let g2 = grad_norm * grad_norm;
            step = loop {
                let v_new = vector::add_scaled(&v, -alpha, &grad_f);
                let x_new = vector::square(&v_new);
                let (f_new, g_new) = p.value_grad(&x_new);
                let bound = if opts.armijo { f - ARMIJO_C * alpha * g2 } else { f };
                if f_new < bound {
                    let a = alpha;
                    alpha *= GROW;
                    break Some((v_new, x_new, f_new, g_new, a));
                }
                alpha *= SHRINK;
                if alpha < MIN_STEP {
                    break None;
                }
            };
        }
        let Some((v_new, x_new, f_new, g_new, taken)) = step else {
            break BcStatus::Stalled;
        };
        v = v_new;
        x = x_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        trace.push(iterations, vec![f, prox(&x, &g), taken]);
    };
    let prox_residual = prox(&x, &g);
    Ok(BcSolveResult {
        x,
        iterations,
        objective: f,
        prox_residual,
        status,
        trace,
    })
}
