//! Linear programs with upper bounds on a subset of the variables,
//!
//! ```text
//! min cᵀx  s.t.  A x = b,  x ≥ 0,  x_𝓘 ≤ u,
//! ```
//!
//! written with slacks `w = u − x_𝓘` and solved by a primal-dual
//! interior-point method with fixed centering, Mehrotra's predictor-corrector,
//! or SQP on the squared-slack form `x = v⊙v`, `w = y⊙y`.

use std::time::Instant;

use rand::seq::index::sample;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vector, AugmentedSolve, Cholesky, DenseMatrix, DiagonalMatrix, LinalgError, SolvePath};
use crate::rng;
use crate::trace::SolveTrace;

const INIT_SCALE: f64 = 100.0;
const DIVERGENCE_FACTOR: f64 = 1e6;

pub const TRACE_COLUMNS: [&str; 5] = ["res", "mu", "alpha_p", "alpha_d", "sigma"];

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid upper bounds: {0}")]
    InvalidBounds(String),
    #[error("constraint matrix is not full row rank (pivot {pivot:.3e} at row {index})")]
    RankDeficient { index: usize, pivot: f64 },
    #[error("iterate is not strictly interior: {0}")]
    NotInterior(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, LpError>;

#[derive(Debug, Clone)]
pub struct LpProblem {
    a: DenseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    upper_idx: Vec<usize>,
    u: Vec<f64>,
    /// `upper_pos[j] = Some(k)` when `j = upper_idx[k]`.
    upper_pos: Vec<Option<usize>>,
}

impl LpProblem {
    /// Validates dimensions, the bound set and the row rank of `A`.
    pub fn new(a: DenseMatrix, b: Vec<f64>, c: Vec<f64>, upper_idx: Vec<usize>, u: Vec<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if b.len() != m || c.len() != n {
            return Err(LpError::DimensionMismatch(format!(
                "A is {m}×{n} but |b| = {}, |c| = {}",
                b.len(),
                c.len()
            )));
        }
        if upper_idx.len() != u.len() {
            return Err(LpError::DimensionMismatch(format!(
                "|𝓘| = {} but |u| = {}",
                upper_idx.len(),
                u.len()
            )));
        }
        let mut upper_pos = vec![None; n];
        for (k, &j) in upper_idx.iter().enumerate() {
            if j >= n {
                return Err(LpError::InvalidBounds(format!("index {j} out of range for n = {n}")));
            }
            if upper_pos[j].replace(k).is_some() {
                return Err(LpError::InvalidBounds(format!("index {j} listed twice")));
            }
        }
        if let Some(k) = u.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(LpError::InvalidBounds(format!(
                "u[{k}] = {} is not positive and finite",
                u[k]
            )));
        }
        if !a.is_finite() || !b.iter().chain(&c).all(|x| x.is_finite()) {
            return Err(LpError::DimensionMismatch("data contains non-finite entries".into()));
        }
        if m > n {
            return Err(LpError::RankDeficient { index: n, pivot: 0.0 });
        }
        if m > 0 {
            match Cholesky::factor(&a.scaled_gram(&vec![1.0; n])) {
                Ok(_) => {}
                Err(LinalgError::SingularSystem { index, pivot, .. }) => {
                    return Err(LpError::RankDeficient { index, pivot })
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(Self {
            a,
            b,
            c,
            upper_idx,
            u,
            upper_pos,
        })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn upper_idx(&self) -> &[usize] {
        &self.upper_idx
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn n_upper(&self) -> usize {
        self.upper_idx.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        vector::dot(&self.c, x)
    }
}

/// Random dense LP: `A`, `c`, `x̃` uniform on `[0,1]`, `b = A x̃`, and
/// `⌊0.05m⌋` bounded variables with `u` uniform on `[1,21]`.
pub fn gen_random_lp(n: usize, m: usize, seed: u64) -> Result<LpProblem> {
    if m == 0 || m > n {
        return Err(LpError::DimensionMismatch(format!(
            "need 1 ≤ m ≤ n, got n = {n}, m = {m}"
        )));
    }
    let mut rng = rng::stream(seed, rng::STREAM_LP);
    let a = DenseMatrix::from_row_major(m, n, rng::uniform_vec(&mut rng, m * n, 0.0, 1.0))?;
    let c = rng::uniform_vec(&mut rng, n, 0.0, 1.0);
    let x_tilde = rng::uniform_vec(&mut rng, n, 0.0, 1.0);
    let b = a.matvec(&x_tilde);
    let n_upper = m / 20;
    let mut upper_idx = sample(&mut rng, n, n_upper).into_vec();
    upper_idx.sort_unstable();
    let u = rng::uniform_vec(&mut rng, n_upper, 1.0, 21.0);
    LpProblem::new(a, b, c, upper_idx, u)
}

/// Primal-dual iterate; also used for search directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IpmIterate {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub lam: Vec<f64>,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsvIterate {
    pub base: IpmIterate,
    pub v: Vec<f64>,
    pub y: Vec<f64>,
}

impl IpmIterate {
    pub fn mu(&self) -> f64 {
        let k = self.x.len() + self.w.len();
        (vector::dot(&self.x, &self.s) + vector::dot(&self.w, &self.t)) / k as f64
    }

    fn check_dims(&self, p: &LpProblem) -> Result<()> {
        let (n, m, k) = (p.n(), p.m(), p.n_upper());
        if self.x.len() != n || self.s.len() != n || self.lam.len() != m || self.w.len() != k || self.t.len() != k {
            return Err(LpError::DimensionMismatch(format!(
                "iterate lengths (x {}, w {}, λ {}, s {}, t {}) for n = {n}, m = {m}, |𝓘| = {k}",
                self.x.len(),
                self.w.len(),
                self.lam.len(),
                self.s.len(),
                self.t.len()
            )));
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        [&self.x, &self.w, &self.lam, &self.s, &self.t]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

fn all_positive(v: &[f64]) -> bool {
    v.iter().all(|x| *x > 0.0)
}

/// `x = s = 100M·1`, `w = t = 100M·1`, `λ = 0` with
/// `M = max(‖A‖∞, ‖b‖∞, ‖c‖∞)`.
pub fn init_iterate(p: &LpProblem) -> IpmIterate {
    let big_m = p.a.norm_inf().max(vector::norm_inf(&p.b)).max(vector::norm_inf(&p.c));
    let big_m = if big_m > 0.0 { big_m } else { 1.0 };
    let v = INIT_SCALE * big_m;
    let (n, k) = (p.n(), p.n_upper());
    IpmIterate {
        x: vec![v; n],
        w: vec![v; k],
        lam: vec![0.0; p.m()],
        s: vec![v; n],
        t: vec![v; k],
    }
}

/// [`init_iterate`] with `v = √x`, `y = √w`.
pub fn init_ssv_iterate(p: &LpProblem) -> SsvIterate {
    let base = init_iterate(p);
    let v = base.x.iter().map(|x| x.sqrt()).collect();
    let y = base.w.iter().map(|x| x.sqrt()).collect();
    SsvIterate { base, v, y }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpResiduals {
    pub r_ci: Vec<f64>,
    pub r_cibar: Vec<f64>,
    pub r_x: Vec<f64>,
    pub r_u: Vec<f64>,
    pub r_xs: Vec<f64>,
    pub r_rw: Vec<f64>,
    pub res: f64,
}

/// Dual residual over all `n` variables, `Aᵀλ + s − [t on 𝓘] − c`.
fn dual_residual(p: &LpProblem, lam: &[f64], s: &[f64], t: &[f64]) -> Vec<f64> {
    let atl = p.a.matvec_t(lam);
    (0..p.n())
        .map(|j| {
            let tj = p.upper_pos[j].map_or(0.0, |k| t[k]);
            atl[j] + s[j] - tj - p.c[j]
        })
        .collect()
}

pub fn compute_residuals(p: &LpProblem, it: &IpmIterate) -> Result<LpResiduals> {
    it.check_dims(p)?;
    let r_c = dual_residual(p, &it.lam, &it.s, &it.t);
    let r_x = vector::sub(&p.a.matvec(&it.x), &p.b);
    let r_u: Vec<f64> = (0..p.n_upper())
        .map(|k| it.x[p.upper_idx[k]] + it.w[k] - p.u[k])
        .collect();
    let r_xs = vector::hadamard(&it.x, &it.s);
    let r_rw = vector::hadamard(&it.t, &it.w);
    let x_neg = vector::negative_part(&it.x);
    let w_neg = vector::negative_part(&it.w);
    let scale = 1.0 + vector::norm2(&p.b).max(vector::norm2(&p.c));
    let res = vector::norm2_blocks(&[&r_c, &r_x, &r_u, &r_xs, &r_rw, &x_neg, &w_neg]) / scale;
    let (r_ci, r_cibar) = split_upper(p, &r_c);
    Ok(LpResiduals {
        r_ci,
        r_cibar,
        r_x,
        r_u,
        r_xs,
        r_rw,
        res,
    })
}

fn split_upper(p: &LpProblem, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let inside = vector::gather(v, &p.upper_idx);
    let outside = (0..p.n()).filter(|j| p.upper_pos[*j].is_none()).map(|j| v[j]).collect();
    (inside, outside)
}

/// Largest `α ≤ 1` with `pos + α·delta ≥ 0`, scaled by `tau`.
pub fn ratio_step(pos: &[f64], delta: &[f64], tau: f64) -> f64 {
    debug_assert_eq!(pos.len(), delta.len());
    let alpha_max = pos
        .iter()
        .zip(delta)
        .filter(|(_, d)| **d < 0.0)
        .fold(1.0_f64, |a, (p, d)| a.min(-p / d));
    tau * alpha_max
}

fn ratio_step2(p1: &[f64], d1: &[f64], p2: &[f64], d2: &[f64], tau: f64) -> f64 {
    ratio_step(p1, d1, tau).min(ratio_step(p2, d2, tau))
}

/// Newton system of one PDIP iterate, factored once and reusable for
/// several complementarity targets.
struct PdipSystem<'a> {
    p: &'a LpProblem,
    it: &'a IpmIterate,
    r_c: Vec<f64>,
    r_x: Vec<f64>,
    r_u: Vec<f64>,
    d: DiagonalMatrix,
}

impl<'a> PdipSystem<'a> {
    fn new(p: &'a LpProblem, it: &'a IpmIterate) -> Result<Self> {
        it.check_dims(p)?;
        if !all_positive(&it.x) || !all_positive(&it.w) || !all_positive(&it.s) || !all_positive(&it.t) {
            return Err(LpError::NotInterior("x, w, s, t must be positive"));
        }
        let r_c = dual_residual(p, &it.lam, &it.s, &it.t);
        let r_x = vector::sub(&p.a.matvec(&it.x), &p.b);
        let r_u = (0..p.n_upper())
            .map(|k| it.x[p.upper_idx[k]] + it.w[k] - p.u[k])
            .collect();
        let d = (0..p.n())
            .map(|j| {
                let base = it.s[j] / it.x[j];
                base + p.upper_pos[j].map_or(0.0, |k| it.t[k] / it.w[k])
            })
            .collect();
        Ok(Self {
            p,
            it,
            r_c,
            r_x,
            r_u,
            d: DiagonalMatrix::new(d),
        })
    }

    /// Direction for complementarity residuals `r_xs`, `r_rw` (already
    /// shifted by `σμ` and any corrector term).
    fn direction(&self, solver: &AugmentedSolve, r_xs: &[f64], r_rw: &[f64]) -> IpmIterate {
        let (p, it) = (self.p, self.it);
        let r_top: Vec<f64> = (0..p.n())
            .map(|j| {
                let base = r_xs[j] / it.x[j] - self.r_c[j];
                base + p.upper_pos[j].map_or(0.0, |k| (-r_rw[k] + it.t[k] * self.r_u[k]) / it.w[k])
            })
            .collect();
        let r_bot = vector::scale(&self.r_x, -1.0);
        let (dx, dlam) = solver.solve(&r_top, &r_bot);
        debug_check(&self.d, &p.a, &dx, &dlam, &r_top, &r_bot);
        let ds = (0..p.n()).map(|j| -(r_xs[j] + it.s[j] * dx[j]) / it.x[j]).collect();
        let dw: Vec<f64> = (0..p.n_upper()).map(|k| -self.r_u[k] - dx[p.upper_idx[k]]).collect();
        let dt = (0..p.n_upper())
            .map(|k| -(r_rw[k] + it.t[k] * dw[k]) / it.w[k])
            .collect();
        IpmIterate {
            x: dx,
            w: dw,
            lam: dlam,
            s: ds,
            t: dt,
        }
    }

    fn factor(&self, path: SolvePath) -> Result<AugmentedSolve<'_>> {
        Ok(AugmentedSolve::new(&self.d, &self.p.a, path)?)
    }
}

/// How far a direction is from satisfying its linear system: the absolute
/// violation, the norm of the right-hand side, and the norm of the
/// individual left-hand-side terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub abs: f64,
    pub rhs: f64,
    pub terms: f64,
}

impl Violation {
    pub fn relative(&self) -> f64 {
        self.abs / (1.0 + self.rhs)
    }

    /// Violation relative to the largest quantities that were added up;
    /// this is what floating point can guarantee late in a solve.
    pub fn scaled(&self) -> f64 {
        self.abs / (1.0 + self.rhs + self.terms)
    }
}

fn upper_part(p: &LpProblem, v: &[f64]) -> Vec<f64> {
    vector::gather(v, &p.upper_idx)
}

/// Violation of the linearized PDIP equations by `dir`, with
/// complementarity targets `r_xs`, `r_rw`.
pub fn pdip_violation(p: &LpProblem, it: &IpmIterate, dir: &IpmIterate, r_xs: &[f64], r_rw: &[f64]) -> Violation {
    let r_c = dual_residual(p, &it.lam, &it.s, &it.t);
    let r_x = vector::sub(&p.a.matvec(&it.x), &p.b);
    let r_u: Vec<f64> = (0..p.n_upper())
        .map(|k| it.x[p.upper_idx[k]] + it.w[k] - p.u[k])
        .collect();
    let rhs = vector::norm2_blocks(&[&r_c, &r_x, &r_u, r_xs, r_rw]);
    let atl = p.a.matvec_t(&dir.lam);
    let adx = p.a.matvec(&dir.x);
    let dual = vector::add(&dual_residual(p, &dir.lam, &dir.s, &dir.t), &p.c);
    let e1 = vector::add(&dual, &r_c);
    let e2 = vector::add(&adx, &r_x);
    let e3: Vec<f64> = (0..p.n_upper())
        .map(|k| dir.x[p.upper_idx[k]] + dir.w[k] + r_u[k])
        .collect();
    let sdx = vector::hadamard(&it.s, &dir.x);
    let xds = vector::hadamard(&it.x, &dir.s);
    let tdw = vector::hadamard(&it.t, &dir.w);
    let wdt = vector::hadamard(&it.w, &dir.t);
    let e4: Vec<f64> = (0..p.n()).map(|j| sdx[j] + xds[j] + r_xs[j]).collect();
    let e5: Vec<f64> = (0..p.n_upper()).map(|k| tdw[k] + wdt[k] + r_rw[k]).collect();
    let terms = vector::norm2_blocks(&[
        &atl,
        &dir.s,
        &dir.t,
        &adx,
        &upper_part(p, &dir.x),
        &dir.w,
        &sdx,
        &xds,
        &tdw,
        &wdt,
    ]);
    Violation {
        abs: vector::norm2_blocks(&[&e1, &e2, &e3, &e4, &e5]),
        rhs,
        terms,
    }
}

fn shifted(v: &[f64], shift: f64) -> Vec<f64> {
    v.iter().map(|x| x - shift).collect()
}

/// Violation of the reduced system `-D dx + Aᵀ dlam = r_top`, `A dx = r_bot`.
fn reduced_violation(
    d: &DiagonalMatrix,
    a: &DenseMatrix,
    dx: &[f64],
    dlam: &[f64],
    r_top: &[f64],
    r_bot: &[f64],
) -> Violation {
    let ddx = d.apply(dx);
    let atl = a.matvec_t(dlam);
    let adx = a.matvec(dx);
    let e_top: Vec<f64> = (0..dx.len()).map(|j| atl[j] - ddx[j] - r_top[j]).collect();
    let e_bot = vector::sub(&adx, r_bot);
    Violation {
        abs: vector::norm2_blocks(&[&e_top, &e_bot]),
        rhs: vector::norm2_blocks(&[r_top, r_bot]),
        terms: vector::norm2_blocks(&[&ddx, &atl, &adx]),
    }
}

/// Every direction passes through the reduced system; the eliminated
/// blocks are recovered exactly from it, so in debug builds the reduced
/// solve is what gets checked. Substitution into the full system is left to
/// the tests, since late iterates make it ill-conditioned.
fn debug_check(d: &DiagonalMatrix, a: &DenseMatrix, dx: &[f64], dlam: &[f64], r_top: &[f64], r_bot: &[f64]) {
    if cfg!(debug_assertions) {
        let v = reduced_violation(d, a, dx, dlam, r_top, r_bot).scaled();
        debug_assert!(!(v > 1e-8), "reduced system violated by {v:.3e}");
    }
}

/// Newton direction on the KKT conditions with complementarity target `σμ`.
pub fn pdip_direction(p: &LpProblem, it: &IpmIterate, sigma: f64, path: SolvePath) -> Result<IpmIterate> {
    let sys = PdipSystem::new(p, it)?;
    let solver = sys.factor(path)?;
    let sm = sigma * it.mu();
    let r_xs = shifted(&vector::hadamard(&it.x, &it.s), sm);
    let r_rw = shifted(&vector::hadamard(&it.t, &it.w), sm);
    let dir = sys.direction(&solver, &r_xs, &r_rw);
    Ok(dir)
}

/// Corrector right-hand side used by [`mpc_direction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MpcCorrector {
    /// Re-solve with the adaptive `σ` only.
    #[default]
    Paper,
    /// Also include the second-order term `Δx_aff⊙Δs_aff`.
    Mehrotra,
}

impl std::str::FromStr for MpcCorrector {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(MpcCorrector::Paper),
            "mehrotra" => Ok(MpcCorrector::Mehrotra),
            other => Err(format!("unknown corrector `{other}` (expected paper|mehrotra)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpcStep {
    pub delta: IpmIterate,
    pub affine: IpmIterate,
    pub sigma: f64,
    pub mu_aff: f64,
}

pub fn mpc_direction(p: &LpProblem, it: &IpmIterate, corrector: MpcCorrector, path: SolvePath) -> Result<MpcStep> {
    let sys = PdipSystem::new(p, it)?;
    let solver = sys.factor(path)?;
    let xs = vector::hadamard(&it.x, &it.s);
    let tw = vector::hadamard(&it.t, &it.w);
    let affine = sys.direction(&solver, &xs, &tw);

    let alpha_p = ratio_step2(&it.x, &affine.x, &it.w, &affine.w, 1.0);
    let alpha_d = ratio_step2(&it.s, &affine.s, &it.t, &affine.t, 1.0);
    let x_aff = vector::add_scaled(&it.x, alpha_p, &affine.x);
    let w_aff = vector::add_scaled(&it.w, alpha_p, &affine.w);
    let s_aff = vector::add_scaled(&it.s, alpha_d, &affine.s);
    let t_aff = vector::add_scaled(&it.t, alpha_d, &affine.t);
    let k = (p.n() + p.n_upper()) as f64;
    let mu_aff = (vector::dot(&x_aff, &s_aff) + vector::dot(&w_aff, &t_aff)) / k;
    let mu = it.mu();
    let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

    let sm = sigma * mu;
    let mut r_xs = shifted(&xs, sm);
    let mut r_rw = shifted(&tw, sm);
    if corrector == MpcCorrector::Mehrotra {
        for j in 0..p.n() {
            r_xs[j] += affine.x[j] * affine.s[j];
        }
        for k in 0..p.n_upper() {
            r_rw[k] += affine.w[k] * affine.t[k];
        }
    }
    let delta = sys.direction(&solver, &r_xs, &r_rw);
    Ok(MpcStep {
        delta,
        affine,
        sigma,
        mu_aff,
    })
}

/// SQP direction on the squared-slack KKT system; no centering.
pub fn ssv_sqp_direction(p: &LpProblem, it: &SsvIterate, path: SolvePath) -> Result<SsvIterate> {
    let b = &it.base;
    b.check_dims(p)?;
    if it.v.len() != p.n() || it.y.len() != p.n_upper() {
        return Err(LpError::DimensionMismatch("v or y has the wrong length".into()));
    }
    if !all_positive(&it.v) || !all_positive(&it.y) || !all_positive(&b.s) || !all_positive(&b.t) {
        return Err(LpError::NotInterior("v, y, s, t must be positive"));
    }
    let (n, k) = (p.n(), p.n_upper());
    let r = ssv_residuals(p, it);

    let d: Vec<f64> = (0..n)
        .map(|j| {
            let vj = it.v[j];
            let base = 0.5 * b.s[j] / (vj * vj);
            base + p.upper_pos[j].map_or(0.0, |q| 0.5 * b.t[q] / (it.y[q] * it.y[q]))
        })
        .collect();
    let r_top: Vec<f64> = (0..n)
        .map(|j| {
            let vj = it.v[j];
            let base = r.sv[j] / vj + 0.5 * b.s[j] / (vj * vj) * r.v[j] - r.c[j];
            base + p.upper_pos[j].map_or(0.0, |q| {
                let yq = it.y[q];
                let ty2 = 0.5 * b.t[q] / (yq * yq);
                -r.ry[q] / yq - ty2 * r.y[q] + ty2 * r.u[q]
            })
        })
        .collect();
    let r_bot = vector::scale(&r.x, -1.0);
    let d = DiagonalMatrix::new(d);
    let solver = AugmentedSolve::new(&d, &p.a, path)?;
    let (dx, dlam) = solver.solve(&r_top, &r_bot);
    debug_check(&d, &p.a, &dx, &dlam, &r_top, &r_bot);

    let dv: Vec<f64> = (0..n).map(|j| (dx[j] + r.v[j]) / (2.0 * it.v[j])).collect();
    let dw: Vec<f64> = (0..k).map(|q| -r.u[q] - dx[p.upper_idx[q]]).collect();
    let dy: Vec<f64> = (0..k).map(|q| (dw[q] + r.y[q]) / (2.0 * it.y[q])).collect();
    let dt: Vec<f64> = (0..k).map(|q| -(r.ry[q] + b.t[q] * dy[q]) / it.y[q]).collect();
    // Δs from the dual equation rather than −V⁻¹(r_sv + SΔv): the two agree
    // exactly, but the latter cancels terms of size S/V² once v is small.
    let atl = p.a.matvec_t(&dlam);
    let ds = (0..n)
        .map(|j| -r.c[j] - atl[j] + p.upper_pos[j].map_or(0.0, |q| dt[q]))
        .collect();
    let dir = SsvIterate {
        base: IpmIterate {
            x: dx,
            w: dw,
            lam: dlam,
            s: ds,
            t: dt,
        },
        v: dv,
        y: dy,
    };
    Ok(dir)
}

struct SsvResiduals {
    c: Vec<f64>,
    x: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    y: Vec<f64>,
    sv: Vec<f64>,
    ry: Vec<f64>,
}

fn ssv_residuals(p: &LpProblem, it: &SsvIterate) -> SsvResiduals {
    let b = &it.base;
    SsvResiduals {
        c: dual_residual(p, &b.lam, &b.s, &b.t),
        x: vector::sub(&p.a.matvec(&b.x), &p.b),
        u: (0..p.n_upper())
            .map(|q| b.x[p.upper_idx[q]] + b.w[q] - p.u[q])
            .collect(),
        v: vector::sub(&b.x, &vector::square(&it.v)),
        y: vector::sub(&b.w, &vector::square(&it.y)),
        sv: vector::hadamard(&it.v, &b.s),
        ry: vector::hadamard(&b.t, &it.y),
    }
}

/// Violation of the linearized squared-slack KKT equations by `dir`.
pub fn ssv_violation(p: &LpProblem, it: &SsvIterate, dir: &SsvIterate) -> Violation {
    let r = ssv_residuals(p, it);
    let b = &it.base;
    let db = &dir.base;
    let rhs = vector::norm2_blocks(&[&r.c, &r.x, &r.u, &r.v, &r.y, &r.sv, &r.ry]);
    let atl = p.a.matvec_t(&db.lam);
    let adx = p.a.matvec(&db.x);
    let two_vdv: Vec<f64> = (0..p.n()).map(|j| 2.0 * it.v[j] * dir.v[j]).collect();
    let two_ydy: Vec<f64> = (0..p.n_upper()).map(|q| 2.0 * it.y[q] * dir.y[q]).collect();
    let sdv = vector::hadamard(&b.s, &dir.v);
    let vds = vector::hadamard(&it.v, &db.s);
    let tdy = vector::hadamard(&b.t, &dir.y);
    let ydt = vector::hadamard(&it.y, &db.t);
    let e_c = vector::add(&vector::add(&dual_residual(p, &db.lam, &db.s, &db.t), &p.c), &r.c);
    let e_x = vector::add(&adx, &r.x);
    let e_u: Vec<f64> = (0..p.n_upper())
        .map(|q| db.x[p.upper_idx[q]] + db.w[q] + r.u[q])
        .collect();
    let e_v: Vec<f64> = (0..p.n()).map(|j| db.x[j] - two_vdv[j] + r.v[j]).collect();
    let e_y: Vec<f64> = (0..p.n_upper()).map(|q| db.w[q] - two_ydy[q] + r.y[q]).collect();
    let e_sv: Vec<f64> = (0..p.n()).map(|j| sdv[j] + vds[j] + r.sv[j]).collect();
    let e_ry: Vec<f64> = (0..p.n_upper()).map(|q| tdy[q] + ydt[q] + r.ry[q]).collect();
    let terms = vector::norm2_blocks(&[
        &atl, &db.s, &db.t, &adx, &db.x, &db.w, &two_vdv, &two_ydy, &sdv, &vds, &tdy, &ydt,
    ]);
    Violation {
        abs: vector::norm2_blocks(&[&e_c, &e_x, &e_u, &e_v, &e_y, &e_sv, &e_ry]),
        rhs,
        terms,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpMethod {
    Pdip,
    Mpc,
    Ssv,
}

impl std::str::FromStr for LpMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pdip" => Ok(LpMethod::Pdip),
            "mpc" => Ok(LpMethod::Mpc),
            "ssv" => Ok(LpMethod::Ssv),
            other => Err(format!("unknown method `{other}` (expected pdip|mpc|ssv)")),
        }
    }
}

impl LpMethod {
    /// Step-length fraction used for random LPs.
    pub fn default_tau(self) -> f64 {
        match self {
            LpMethod::Pdip => 0.9,
            LpMethod::Mpc => 0.995,
            LpMethod::Ssv => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpOptions {
    pub method: LpMethod,
    pub tau: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub max_seconds: f64,
    /// Fixed centering parameter for [`LpMethod::Pdip`].
    pub sigma: f64,
    pub solve_path: SolvePath,
    pub corrector: MpcCorrector,
    /// For SSV, recompute `x = v⊙v`, `w = y⊙y` after each step instead of
    /// stepping `x`, `w` along their own directions.
    pub ssv_reset_x: bool,
}

impl LpOptions {
    pub fn new(method: LpMethod) -> Self {
        Self {
            method,
            tau: method.default_tau(),
            eps: 1e-8,
            max_iter: 500,
            max_seconds: 750.0,
            sigma: 0.1,
            solve_path: SolvePath::Normal,
            corrector: MpcCorrector::Paper,
            ssv_reset_x: false,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Solved,
    IterLimit,
    TimeLimit,
    Diverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolveResult {
    pub iterate: IpmIterate,
    /// `(v, y)` for the squared-slack method.
    pub ssv: Option<(Vec<f64>, Vec<f64>)>,
    pub status: LpStatus,
    pub iterations: usize,
    pub res: f64,
    pub objective: f64,
    pub failure: Option<String>,
    pub trace: SolveTrace,
}

fn validate_options(o: &LpOptions) -> Result<()> {
    if !(o.eps > 0.0) {
        return Err(LpError::InvalidBounds(format!("eps must be positive, got {}", o.eps)));
    }
    if !(o.tau > 0.0 && o.tau <= 1.0) {
        return Err(LpError::InvalidBounds(format!("tau must lie in (0, 1], got {}", o.tau)));
    }
    if !(0.0..=1.0).contains(&o.sigma) {
        return Err(LpError::InvalidBounds(format!(
            "sigma must lie in [0, 1], got {}",
            o.sigma
        )));
    }
    Ok(())
}

pub fn lp_solve(p: &LpProblem, opts: &LpOptions) -> Result<LpSolveResult> {
    validate_options(opts)?;
    let start = Instant::now();
    let mut state = match opts.method {
        LpMethod::Ssv => {
            let s = init_ssv_iterate(p);
            State::Ssv(s)
        }
        _ => State::Ipm(init_iterate(p)),
    };
    let mut trace = SolveTrace::new(&TRACE_COLUMNS);
    let mut best = f64::INFINITY;
    let (mut alpha_p, mut alpha_d, mut sigma) = (f64::NAN, f64::NAN, f64::NAN);
    let mut iterations = 0;
    let (status, res, failure) = loop {
        let base = state.base();
        let res = compute_residuals(p, base)?.res;
        trace.push(iterations, vec![res, base.mu(), alpha_p, alpha_d, sigma]);
        if !res.is_finite() || !base.is_finite() {
            break (LpStatus::Diverged, res, Some("non-finite iterate".to_string()));
        }
        if res <= opts.eps {
            break (LpStatus::Solved, res, None);
        }
        best = best.min(res);
        if res > DIVERGENCE_FACTOR * best {
            break (
                LpStatus::Diverged,
                res,
                Some(format!(
                    "residual {res:.3e} exceeds {DIVERGENCE_FACTOR:e} × best {best:.3e}"
                )),
            );
        }
        if iterations >= opts.max_iter {
            break (LpStatus::IterLimit, res, None);
        }
        if start.elapsed().as_secs_f64() > opts.max_seconds {
            break (LpStatus::TimeLimit, res, None);
        }
        let step = match &mut state {
            State::Ipm(it) => ipm_step(p, it, opts),
            State::Ssv(it) => ssv_step(p, it, opts),
        };
        match step {
            Ok((ap, ad, sg)) => {
                alpha_p = ap;
                alpha_d = ad;
                sigma = sg;
            }
            Err(LpError::Linalg(e)) => {
                break (LpStatus::Diverged, res, Some(format!("iteration {iterations}: {e}")));
            }
            Err(e) => return Err(e),
        }
        iterations += 1;
    };
    let objective = p.objective(&state.base().x);
    let (iterate, ssv) = match state {
        State::Ipm(it) => (it, None),
        State::Ssv(it) => (it.base, Some((it.v, it.y))),
    };
    Ok(LpSolveResult {
        iterate,
        ssv,
        status,
        iterations,
        res,
        objective,
        failure,
        trace,
    })
}

enum State {
    Ipm(IpmIterate),
    Ssv(SsvIterate),
}

impl State {
    fn base(&self) -> &IpmIterate {
        match self {
            State::Ipm(it) => it,
            State::Ssv(it) => &it.base,
        }
    }
}

fn apply_step(it: &mut IpmIterate, dir: &IpmIterate, alpha_p: f64, alpha_d: f64) {
    vector::axpy(alpha_p, &dir.x, &mut it.x);
    vector::axpy(alpha_p, &dir.w, &mut it.w);
    vector::axpy(alpha_d, &dir.lam, &mut it.lam);
    vector::axpy(alpha_d, &dir.s, &mut it.s);
    vector::axpy(alpha_d, &dir.t, &mut it.t);
}

fn ipm_step(p: &LpProblem, it: &mut IpmIterate, opts: &LpOptions) -> Result<(f64, f64, f64)> {
    let (dir, sigma) = match opts.method {
        LpMethod::Mpc => {
            let step = mpc_direction(p, it, opts.corrector, opts.solve_path)?;
            (step.delta, step.sigma)
        }
        _ => (pdip_direction(p, it, opts.sigma, opts.solve_path)?, opts.sigma),
    };
    let alpha_p = ratio_step2(&it.x, &dir.x, &it.w, &dir.w, opts.tau);
    let alpha_d = ratio_step2(&it.s, &dir.s, &it.t, &dir.t, opts.tau);
    apply_step(it, &dir, alpha_p, alpha_d);
    Ok((alpha_p, alpha_d, sigma))
}

fn ssv_step(p: &LpProblem, it: &mut SsvIterate, opts: &LpOptions) -> Result<(f64, f64, f64)> {
    let dir = ssv_sqp_direction(p, it, opts.solve_path)?;
    let alpha_p = ratio_step2(&it.v, &dir.v, &it.y, &dir.y, opts.tau);
    let alpha_d = ratio_step2(&it.base.s, &dir.base.s, &it.base.t, &dir.base.t, opts.tau);
    apply_step(&mut it.base, &dir.base, alpha_p, alpha_d);
    vector::axpy(alpha_p, &dir.v, &mut it.v);
    vector::axpy(alpha_p, &dir.y, &mut it.y);
    if opts.ssv_reset_x {
        it.base.x = vector::square(&it.v);
        it.base.w = vector::square(&it.y);
    }
    Ok((alpha_p, alpha_d, f64::NAN))
}
