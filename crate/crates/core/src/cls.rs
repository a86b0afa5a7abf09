//! Sparse least squares under a pseudo-norm ball, `min ½‖Ax − b‖² s.t.
//! Σ|xᵢ|^τ ≤ R_τ`, through the power parametrization
//! `x = v^{⊙L} − w^{⊙L}` and projected gradient with continuation in `τ`.

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vector, DenseMatrix};
use crate::rng;

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const GROW: f64 = 2.0;
const MIN_STEP: f64 = 1e-20;

pub const PROX_TOL: f64 = 1e-6;
pub const MAX_STAGE_ITER: usize = 200;
pub const DEFAULT_TAUS: [f64; 5] = [1.0, 0.5, 0.25, 1.0 / 6.0, 0.125];

#[derive(Debug, Error, PartialEq)]
pub enum ClsError {
    #[error("invalid stage: {0}")]
    InvalidStage(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone)]
pub struct ClsProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub beta0: Vec<f64>,
    pub sigma: f64,
}

impl ClsProblem {
    pub fn n(&self) -> usize {
        self.beta0.len()
    }

    /// `R_τ = Σ|β₀ᵢ|^τ`
    pub fn radius(&self, tau: f64) -> f64 {
        self.beta0.iter().map(|b| b.abs().powf(tau)).sum()
    }

    pub fn recovery_error(&self, x: &[f64]) -> f64 {
        vector::norm2(&vector::sub(x, &self.beta0)) / vector::norm2(&self.beta0)
    }
}

/// `A` standard normal, `β₀` with `s` nonzeros uniform on `[−1,1]`,
/// `b = Aβ₀ + e`, `e ~ N(0, σ²I)`.
pub fn gen_cls(n: usize, m: usize, s: usize, sigma: f64, seed: u64) -> ClsProblem {
    assert!(s >= 1 && s <= n && m >= 1, "need 1 ≤ s ≤ n and m ≥ 1");
    let mut g = rng::stream(seed, rng::STREAM_CLS);
    let a = DenseMatrix::from_row_major(m, n, rng::normal_vec(&mut g, m * n)).expect("m×n buffer");
    let support = sample(&mut g, n, s).into_vec();
    let values = rng::uniform_vec(&mut g, s, -1.0, 1.0);
    let mut beta0 = vec![0.0; n];
    for (&i, &v) in support.iter().zip(&values) {
        beta0[i] = v;
    }
    let noise = Normal::new(0.0, sigma).expect("sigma ≥ 0");
    let b = a.matvec(&beta0).into_iter().map(|y| y + noise.sample(&mut g)).collect();
    ClsProblem { a, b, beta0, sigma }
}

/// Euclidean projection onto `{z : ‖z‖₁ ≤ radius}` by sorting `|z|` and
/// soft-thresholding at the resulting level.
pub fn project_l1_ball(z: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "radius must be positive");
    if vector::norm1(z) <= radius {
        return z.to_vec();
    }
    let mut mags: Vec<f64> = z.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &mk) in mags.iter().enumerate() {
        cumsum += mk;
        let t = (cumsum - radius) / (k + 1) as f64;
        if mk > t {
            theta = t;
        } else {
            break;
        }
    }
    z.iter().map(|x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}

pub fn project_l2_ball(z: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "radius must be positive");
    let norm = vector::norm2(z);
    if norm > radius {
        vector::scale(z, radius / norm)
    } else {
        z.to_vec()
    }
}

/// `x = v^{⊙L} − w^{⊙L}`
pub fn power_map(v: &[f64], w: &[f64], power: u32) -> Vec<f64> {
    vector::sub(&vector::hadamard_pow(v, power), &vector::hadamard_pow(w, power))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerValueGrad {
    pub g: f64,
    pub gv: Vec<f64>,
    pub gw: Vec<f64>,
}

/// `g = ½‖A(v^{⊙L} − w^{⊙L}) − b‖²` with its gradients in `v` and `w`.
pub fn power_value_grad(p: &ClsProblem, v: &[f64], w: &[f64], power: u32) -> PowerValueGrad {
    assert!(power >= 1, "power must be at least 1");
    let x = power_map(v, w, power);
    let r = vector::sub(&p.a.matvec(&x), &p.b);
    let atr = p.a.matvec_t(&r);
    let l = power as f64;
    let vp: Vec<f64> = v.iter().map(|x| x.powi(power as i32 - 1)).collect();
    let wp: Vec<f64> = w.iter().map(|x| x.powi(power as i32 - 1)).collect();
    PowerValueGrad {
        g: 0.5 * vector::dot(&r, &r),
        gv: (0..v.len()).map(|i| l * vp[i] * atr[i]).collect(),
        gw: (0..w.len()).map(|i| -l * wp[i] * atr[i]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Ball {
    L2,
    L1,
}

/// One continuation stage: `τ = 1` uses squares on the ℓ₂ ball of radius
/// `√R₁`; `τ = 1/L` (`L` even) uses `L`-th powers on the ℓ₁ ball of radius
/// `R_{1/L}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauStage {
    pub tau: f64,
    pub power: u32,
    pub ball: Ball,
    pub radius: f64,
}

impl TauStage {
    pub fn new(tau: f64, r_tau: f64) -> Result<Self, ClsError> {
        if !(r_tau > 0.0) {
            return Err(ClsError::InvalidStage(format!("radius must be positive, got {r_tau}")));
        }
        if tau == 1.0 {
            return Ok(Self {
                tau,
                power: 2,
                ball: Ball::L2,
                radius: r_tau.sqrt(),
            });
        }
        let l = (1.0 / tau).round();
        if !(tau > 0.0 && tau < 1.0) || ((1.0 / tau) - l).abs() > 1e-9 || !(l as u32).is_multiple_of(2) {
            return Err(ClsError::InvalidStage(format!(
                "tau must be 1 or 1/L for even L, got {tau}"
            )));
        }
        Ok(Self {
            tau,
            power: l as u32,
            ball: Ball::L1,
            radius: r_tau,
        })
    }

    pub fn for_problem(p: &ClsProblem, tau: f64) -> Result<Self, ClsError> {
        Self::new(tau, p.radius(tau))
    }

    /// Projection of the stacked `(v, w)` onto the stage's ball.
    pub fn project(&self, vw: &[f64]) -> Vec<f64> {
        match self.ball {
            Ball::L2 => project_l2_ball(vw, self.radius),
            Ball::L1 => project_l1_ball(vw, self.radius),
        }
    }
}

fn split(vw: &[f64]) -> (&[f64], &[f64]) {
    vw.split_at(vw.len() / 2)
}

fn stacked_value_grad(p: &ClsProblem, vw: &[f64], power: u32) -> (f64, Vec<f64>) {
    let (v, w) = split(vw);
    let PowerValueGrad { g, mut gv, gw } = power_value_grad(p, v, w, power);
    gv.extend(gw);
    (g, gv)
}

/// `‖z − P[z − ∇g(z)]‖₂`
fn prox_residual(stage: &TauStage, z: &[f64], grad: &[f64]) -> f64 {
    let trial = stage.project(&vector::sub(z, grad));
    vector::norm2(&vector::sub(z, &trial))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub prox_residual: f64,
}

/// Projected gradient with Armijo backtracking; the trial step starts at 1
/// and afterwards at twice the last accepted step.
pub fn pg_armijo_solve(
    p: &ClsProblem,
    stage: &TauStage,
    v0: &[f64],
    w0: &[f64],
    max_iter: usize,
) -> Result<StageResult, ClsError> {
    let n = p.n();
    if v0.len() != n || w0.len() != n {
        return Err(ClsError::DimensionMismatch(format!("v, w must have length {n}")));
    }
    let mut z: Vec<f64> = v0.iter().chain(w0).copied().collect();
    let (mut f, mut grad) = stacked_value_grad(p, &z, stage.power);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut prox = prox_residual(stage, &z, &grad);
    while prox > PROX_TOL && iterations < max_iter {
        let mut alpha = step;
        let (z_new, f_new, g_new) = loop {
            let cand = stage.project(&vector::add_scaled(&z, -alpha, &grad));
            let (fc, gc) = stacked_value_grad(p, &cand, stage.power);
            let decrease = vector::dot(&grad, &vector::sub(&cand, &z));
            if fc <= f + ARMIJO_C * decrease || alpha < MIN_STEP {
                break (cand, fc, gc);
            }
            alpha *= SHRINK;
        };
        step = GROW * alpha;
        z = z_new;
        f = f_new;
        grad = g_new;
        iterations += 1;
        prox = prox_residual(stage, &z, &grad);
    }
    let (v, w) = split(&z);
    Ok(StageResult {
        v: v.to_vec(),
        w: w.to_vec(),
        iterations,
        objective: f,
        prox_residual: prox,
    })
}

/// `(v, w)` representing `x` in the stage's power: `v = (x₊)^{1/L}`,
/// `w = (x₋)^{1/L}`, then projected onto the stage's ball.
pub fn warm_start(stage: &TauStage, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let inv = 1.0 / stage.power as f64;
    let mut z: Vec<f64> = x.iter().map(|xi| xi.max(0.0).powf(inv)).collect();
    z.extend(x.iter().map(|xi| (-xi).max(0.0).powf(inv)));
    let z = stage.project(&z);
    let (v, w) = split(&z);
    (v.to_vec(), w.to_vec())
}

/// Standard normal `(v, w)` projected onto the stage's ball.
pub fn random_start(stage: &TauStage, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut g = rng::stream(seed, rng::STREAM_INIT);
    let z = stage.project(&rng::normal_vec(&mut g, 2 * n));
    let (v, w) = split(&z);
    (v.to_vec(), w.to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub tau: f64,
    pub iterations: usize,
    pub objective_ratio: f64,
    pub recovery_error: f64,
    pub prox_residual: f64,
}

/// Runs the stages in order, starting from a random point for the first and
/// warm-starting each later stage from the previous solution `x`.
pub fn continuation_solve(p: &ClsProblem, taus: &[f64], seed: u64) -> Result<Vec<StageReport>, ClsError> {
    if taus.is_empty() || taus.windows(2).any(|t| !(t[1] < t[0])) {
        return Err(ClsError::InvalidStage(
            "taus must be nonempty and strictly decreasing".into(),
        ));
    }
    let b2 = vector::dot(&p.b, &p.b);
    let mut x: Option<Vec<f64>> = None;
    let mut reports = Vec::with_capacity(taus.len());
    for &tau in taus {
        let stage = TauStage::for_problem(p, tau)?;
        let (v0, w0) = match &x {
            None => random_start(&stage, p.n(), seed),
            Some(x) => warm_start(&stage, x),
        };
        let r = pg_armijo_solve(p, &stage, &v0, &w0, MAX_STAGE_ITER)?;
        let xs = power_map(&r.v, &r.w, stage.power);
        reports.push(StageReport {
            tau,
            iterations: r.iterations,
            objective_ratio: r.objective / b2,
            recovery_error: p.recovery_error(&xs),
            prox_residual: r.prox_residual,
        });
        x = Some(xs);
    }
    Ok(reports)
}
