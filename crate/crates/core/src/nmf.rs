//! Symmetric nonnegative matrix factorization `min ‖XXᵀ − M‖²_F, X ≥ 0`,
//! solved directly on `X` by projected gradient or on `X = V⊙V` by
//! unconstrained gradient descent and L-BFGS.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vector, DenseMatrix};
use crate::rng;
use crate::trace::SolveTrace;

const SHRINK: f64 = 0.35;
const GROW: f64 = 2.0;
const MIN_STEP: f64 = 1e-300;
const LBFGS_MEMORY: usize = 10;
const LBFGS_ARMIJO: f64 = 1e-4;
const LBFGS_SHRINK: f64 = 0.5;

pub const TRACE_COLUMNS: [&str; 2] = ["F", "acc"];

#[derive(Debug, Error)]
pub enum NmfError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no convergence after {} iterations (acc = {:.3e})", .0.iterations, .0.acc)]
    MaxIterReached(Box<NmfResult>),
}

#[derive(Debug, Clone)]
pub struct NmfProblem {
    pub m: DenseMatrix,
    pub r: usize,
    /// Generating factor, when known.
    pub u: Option<DenseMatrix>,
}

impl NmfProblem {
    /// `M = U Uᵀ` for a given nonnegative factor.
    pub fn from_factor(u: DenseMatrix) -> Self {
        let m = u.matmul(&u.transpose());
        Self {
            m,
            r: u.cols(),
            u: Some(u),
        }
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    /// `‖XXᵀ − M‖²_F / ‖M‖²_F`
    pub fn acc(&self, x: &DenseMatrix) -> f64 {
        residual(&self.m, x).norm_fro().powi(2) / self.m.norm_fro().powi(2)
    }
}

/// `U` with i.i.d. uniform `[0,1]` entries and `M = UUᵀ`.
pub fn gen_nmf(n: usize, r: usize, seed: u64) -> NmfProblem {
    assert!(1 <= r && r <= n, "need 1 ≤ r ≤ n");
    let mut g = rng::stream(seed, rng::STREAM_NMF);
    let u = DenseMatrix::from_row_major(n, r, rng::uniform_vec(&mut g, n * r, 0.0, 1.0)).expect("n×r buffer");
    NmfProblem::from_factor(u)
}

/// Starting `V` with uniform `[0,1]` entries scaled by `(mean(M)/r)^{1/4}`.
pub fn nmf_start(p: &NmfProblem, seed: u64) -> DenseMatrix {
    let (n, r) = (p.n(), p.r);
    let mean = p.m.as_slice().iter().sum::<f64>() / (n * n) as f64;
    let scale = (mean / r as f64).max(0.0).powf(0.25);
    let mut g = rng::stream(seed, rng::STREAM_INIT);
    let data = rng::uniform_vec(&mut g, n * r, 0.0, 1.0)
        .into_iter()
        .map(|x| x * scale)
        .collect();
    DenseMatrix::from_row_major(n, r, data).expect("n×r buffer")
}

fn residual(m: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    x.matmul(&x.transpose()).sub(m)
}

/// `f(X) = ‖XXᵀ − M‖²_F` and `∇f(X) = 4(XXᵀ − M)X`.
pub fn nmf_original_value_grad(m: &DenseMatrix, x: &DenseMatrix) -> (f64, DenseMatrix) {
    let r = residual(m, x);
    let f = r.norm_fro().powi(2);
    (f, r.matmul(x).scale(4.0))
}

/// `F(V) = f(V⊙V)` and `∇F(V) = 2V⊙∇f(V⊙V)`.
pub fn nmf_value_grad(m: &DenseMatrix, v: &DenseMatrix) -> (f64, DenseMatrix) {
    let x = v.hadamard(v);
    let (f, g) = nmf_original_value_grad(m, &x);
    (f, v.hadamard(&g).scale(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NmfVariant {
    Pg,
    PgPolyak,
    Gd,
    GdPolyak,
    Lbfgs,
}

impl NmfVariant {
    pub const ALL: [NmfVariant; 5] = [
        NmfVariant::Pg,
        NmfVariant::PgPolyak,
        NmfVariant::Gd,
        NmfVariant::GdPolyak,
        NmfVariant::Lbfgs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NmfVariant::Pg => "pg",
            NmfVariant::PgPolyak => "pg_polyak",
            NmfVariant::Gd => "gd",
            NmfVariant::GdPolyak => "gd_polyak",
            NmfVariant::Lbfgs => "lbfgs",
        }
    }

    fn on_original(self) -> bool {
        matches!(self, NmfVariant::Pg | NmfVariant::PgPolyak)
    }
}

impl std::str::FromStr for NmfVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        NmfVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected pg|pg_polyak|gd|gd_polyak|lbfgs)"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NmfResult {
    pub x: DenseMatrix,
    pub iterations: usize,
    pub acc: f64,
    /// Iterations at which a Polyak step increased the objective.
    pub increases: usize,
    pub trace: SolveTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfOptions {
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for NmfOptions {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            max_iter: 20_000,
        }
    }
}

/// Runs `variant` from `V0` (the projected-gradient variants start at
/// `X0 = V0⊙V0`) until `acc ≤ eps`.
pub fn nmf_solve(
    p: &NmfProblem,
    v0: &DenseMatrix,
    variant: NmfVariant,
    opts: &NmfOptions,
) -> Result<NmfResult, NmfError> {
    if v0.shape() != (p.n(), p.r) || p.m.shape() != (p.n(), p.n()) {
        return Err(NmfError::DimensionMismatch(format!(
            "M is {:?}, V0 is {:?}, r = {}",
            p.m.shape(),
            v0.shape(),
            p.r
        )));
    }
    let m_norm2 = p.m.norm_fro().powi(2);
    let value_grad = |z: &DenseMatrix| {
        if variant.on_original() {
            nmf_original_value_grad(&p.m, z)
        } else {
            nmf_value_grad(&p.m, z)
        }
    };
    let to_x = |z: &DenseMatrix| {
        if variant.on_original() {
            z.clone()
        } else {
            z.hadamard(z)
        }
    };
    let project = |z: DenseMatrix| {
        if variant.on_original() {
            z.map(|a| a.max(0.0))
        } else {
            z
        }
    };

    let mut z = if variant.on_original() {
        v0.hadamard(v0)
    } else {
        v0.clone()
    };
    let (mut f, mut g) = value_grad(&z);
    let mut trace = SolveTrace::new(&TRACE_COLUMNS);
    let mut step = 1.0;
    let mut increases = 0;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    loop {
        let acc = f / m_norm2;
        trace.push(iterations, vec![f, acc]);
        let done = acc <= opts.eps;
        if done || iterations >= opts.max_iter || !f.is_finite() {
            let result = NmfResult {
                x: to_x(&z),
                iterations,
                acc,
                increases,
                trace,
            };
            return if done {
                Ok(result)
            } else {
                Err(NmfError::MaxIterReached(Box::new(result)))
            };
        }
        let (z_new, f_new, g_new) = match variant {
            NmfVariant::Pg | NmfVariant::Gd => {
                let mut alpha = step;
                loop {
                    let cand = project(z.add(&g.scale(-alpha)));
                    let (fc, gc) = value_grad(&cand);
                    if fc < f || alpha < MIN_STEP {
                        step = GROW * alpha;
                        break (cand, fc, gc);
                    }
                    alpha *= SHRINK;
                }
            }
            NmfVariant::PgPolyak | NmfVariant::GdPolyak => {
                let gn2 = g.norm_fro().powi(2);
                let alpha = if gn2 > 0.0 { f / (2.0 * gn2) } else { 0.0 };
                let cand = project(z.add(&g.scale(-alpha)));
                let (fc, gc) = value_grad(&cand);
                if fc > f {
                    increases += 1;
                }
                (cand, fc, gc)
            }
            NmfVariant::Lbfgs => lbfgs_step(&z, f, &g, &mut memory, &value_grad),
        };
        z = z_new;
        f = f_new;
        g = g_new;
        iterations += 1;
    }
}

/// Two-loop recursion direction `-H g`.
fn two_loop(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * vector::dot(s, &q);
        vector::axpy(-a, y, &mut q);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = vector::dot(s, y) / vector::dot(y, y);
        q = vector::scale(&q, gamma);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * vector::dot(y, &q);
        vector::axpy(a - b, s, &mut q);
    }
    vector::scale(&q, -1.0)
}

fn lbfgs_step(
    v: &DenseMatrix,
    f: f64,
    g: &DenseMatrix,
    memory: &mut VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    value_grad: &impl Fn(&DenseMatrix) -> (f64, DenseMatrix),
) -> (DenseMatrix, f64, DenseMatrix) {
    let (rows, cols) = v.shape();
    let gs = g.as_slice();
    let mut d = two_loop(gs, memory);
    let mut slope = vector::dot(gs, &d);
    if !(slope < 0.0) {
        memory.clear();
        d = vector::scale(gs, -1.0);
        slope = -vector::dot(gs, gs);
    }
    let mut alpha = if memory.is_empty() {
        1.0 / vector::norm2(gs).max(1.0)
    } else {
        1.0
    };
    let (cand, fc, gc) = loop {
        let cand = DenseMatrix::from_row_major(rows, cols, vector::add_scaled(v.as_slice(), alpha, &d)).expect("shape");
        let (fc, gc) = value_grad(&cand);
        if fc <= f + LBFGS_ARMIJO * alpha * slope || alpha < MIN_STEP {
            break (cand, fc, gc);
        }
        alpha *= LBFGS_SHRINK;
    };
    let s = vector::sub(cand.as_slice(), v.as_slice());
    let y = vector::sub(gc.as_slice(), gs);
    let sy = vector::dot(&s, &y);
    if sy > 1e-12 * vector::norm2(&s) * vector::norm2(&y) {
        if memory.len() == LBFGS_MEMORY {
            memory.pop_front();
        }
        memory.push_back((s, y, 1.0 / sy));
    }
    (cand, fc, gc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor() {
        let p = NmfProblem::from_factor(DenseMatrix::identity(3));
        assert_eq!(p.m, DenseMatrix::identity(3));
    }

    #[test]
    fn ground_truth_is_global_minimum() {
        let p = gen_nmf(8, 3, 1);
        let u = p.u.clone().unwrap();
        assert_eq!(p.acc(&u), 0.0);
        let v = u.map(f64::sqrt);
        let (f, g) = nmf_value_grad(&p.m, &v);
        assert!(f < 1e-24 && g.max_abs() < 1e-12);
        let r = nmf_solve(&p, &v, NmfVariant::GdPolyak, &NmfOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn zero_is_spurious_stationary_point() {
        let p = gen_nmf(5, 2, 2);
        let (f, g) = nmf_value_grad(&p.m, &DenseMatrix::zeros(5, 2));
        assert!((f - p.m.norm_fro().powi(2)).abs() < 1e-12);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn every_variant_converges_on_small_instance() {
        let p = gen_nmf(20, 3, 4);
        let v0 = nmf_start(&p, 4);
        for variant in NmfVariant::ALL {
            let r = nmf_solve(
                &p,
                &v0,
                variant,
                &NmfOptions {
                    eps: 1e-3,
                    max_iter: 50_000,
                },
            )
            .unwrap_or_else(|e| panic!("{}: {e}", variant.name()));
            assert!(r.acc <= 1e-3);
            assert!(r.x.as_slice().iter().all(|x| *x >= 0.0));
            assert!((p.acc(&r.x) - r.acc).abs() <= 1e-12);
        }
    }

    #[test]
    fn backtracking_is_monotone() {
        let p = gen_nmf(15, 2, 6);
        let v0 = nmf_start(&p, 6);
        for variant in [NmfVariant::Pg, NmfVariant::Gd, NmfVariant::Lbfgs] {
            let r = nmf_solve(
                &p,
                &v0,
                variant,
                &NmfOptions {
                    eps: 1e-6,
                    max_iter: 300,
                },
            );
            let trace = match r {
                Ok(r) => r.trace,
                Err(NmfError::MaxIterReached(r)) => r.trace,
                Err(e) => panic!("{e}"),
            };
            let f = trace.column("F").unwrap();
            assert!(f.windows(2).all(|w| w[1] <= w[0]), "{}", variant.name());
        }
    }
}
