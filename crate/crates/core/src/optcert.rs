//! Optimality certificates for bound-constrained problems, their direct
//! square substitution, general inequality-constrained problems and their
//! squared-slack reformulation.
//!
//! Conventions: the constrained problem is `min f(x) s.t. c(x) ≥ 0` with
//! Lagrangian `f(x) − sᵀc(x)`; the squared-slack form replaces the
//! inequalities by `c(x) − v⊙v = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, vector, DenseMatrix, HouseholderQr, LinalgError};

pub const DEFAULT_EIG_TOL: f64 = 1e-8;
const PINV_RANK_RTOL: f64 = 1e-10;
const NONNEG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point is not first-order stationary: residual {residual:e} exceeds {bound:e}")]
    NotFirstOrder { residual: f64, bound: f64 },
    #[error("callback failure: {0}")]
    CallbackFailure(String),
    #[error("active constraint Jacobian is rank deficient (row {index})")]
    RankDeficientActiveJacobian { index: usize },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("{name} = {value} is outside (0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, CertError>;

fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(CertError::DimensionMismatch(format!(
            "{what}: expected length {expected}, got {got}"
        )));
    }
    Ok(())
}

/// Inactive / strongly active / degenerate index sets of a bound-constrained point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPartition {
    pub inactive: Vec<usize>,
    pub active: Vec<usize>,
    pub degenerate: Vec<usize>,
}

/// `‖x − max(x − grad, 0)‖₂`, zero exactly at first-order points of `min f(x), x ≥ 0`.
pub fn bc_prox_residual(grad: &[f64], x: &[f64]) -> Result<f64> {
    check_len("grad", grad.len(), x.len())?;
    if let Some(i) = x.iter().position(|xi| *xi < -NONNEG_SLACK) {
        return Err(CertError::HypothesisViolated(format!("x[{i}] = {} is negative", x[i])));
    }
    Ok(x.iter()
        .zip(grad)
        .map(|(xi, gi)| {
            let r = xi - (xi - gi).max(0.0);
            r * r
        })
        .sum::<f64>()
        .sqrt())
}

pub fn bc_classify(x: &[f64], grad: &[f64], tol: f64) -> Result<IndexPartition> {
    let residual = bc_prox_residual(grad, x)?;
    let bound = tol * (1.0 + vector::norm2(grad));
    if residual > bound {
        return Err(CertError::NotFirstOrder { residual, bound });
    }
    let mut part = IndexPartition::default();
    for (i, (&xi, &gi)) in x.iter().zip(grad).enumerate() {
        if xi > tol {
            part.inactive.push(i);
        } else if gi > tol {
            part.active.push(i);
        } else {
            part.degenerate.push(i);
        }
    }
    Ok(part)
}

/// Weak second-order test for `min f(x), x ≥ 0`: first-order residual plus
/// the smallest eigenvalue of `∇²f` restricted to the inactive indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcWeak2n {
    pub prox_residual: f64,
    pub min_eig_inactive: f64,
    pub is_first_order: bool,
    pub is_weak_2n: bool,
}

pub fn bc_weak_2n_check(x: &[f64], grad: &[f64], hess: &DenseMatrix, tol: f64) -> Result<BcWeak2n> {
    let prox_residual = bc_prox_residual(grad, x)?;
    if hess.shape() != (x.len(), x.len()) {
        return Err(CertError::DimensionMismatch("hessian shape".into()));
    }
    let inactive: Vec<usize> = (0..x.len()).filter(|&i| x[i] > tol).collect();
    let sub = hess.select_rows(&inactive).select_cols(&inactive);
    let min_eig_inactive = linalg::sym_eig_min(&sub.symmetrize())?;
    let is_first_order = prox_residual <= tol;
    Ok(BcWeak2n {
        prox_residual,
        min_eig_inactive,
        is_first_order,
        is_weak_2n: is_first_order && min_eig_inactive >= -tol,
    })
}

/// `∇F(v) = 2 v ⊙ ∇f(v⊙v)` given `∇f` evaluated at `v⊙v`.
pub fn dss_grad(grad_f: &[f64], v: &[f64]) -> Vec<f64> {
    v.iter().zip(grad_f).map(|(vi, gi)| 2.0 * vi * gi).collect()
}

/// `∇²F(v) = 2 diag(∇f) + 4 V ∇²f V` with both derivatives taken at `v⊙v`.
pub fn dss_hess(grad_f: &[f64], hess_f: &DenseMatrix, v: &[f64]) -> DenseMatrix {
    let n = v.len();
    DenseMatrix::from_fn(n, n, |i, j| {
        let mut h = 4.0 * v[i] * hess_f[(i, j)] * v[j];
        if i == j {
            h += 2.0 * grad_f[i];
        }
        h
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dss2nCheck {
    pub grad_norm: f64,
    pub min_eig: f64,
    pub is_first_order: bool,
    pub is_2n: bool,
    pub is_2s_strict: bool,
}

pub fn dss_bc_2n_check<G, H>(f_grad: G, f_hess: H, v: &[f64], tol: f64) -> Result<Dss2nCheck>
where
    G: Fn(&[f64]) -> Vec<f64>,
    H: Fn(&[f64]) -> DenseMatrix,
{
    let n = v.len();
    let x = vector::square(v);
    let g = f_grad(&x);
    if g.len() != n || !g.iter().all(|a| a.is_finite()) {
        return Err(CertError::CallbackFailure(format!(
            "gradient has length {} (expected {n}) or non-finite entries",
            g.len()
        )));
    }
    let h = f_hess(&x);
    if h.shape() != (n, n) || !h.is_finite() {
        return Err(CertError::CallbackFailure(format!(
            "hessian has shape {:?} (expected ({n}, {n})) or non-finite entries",
            h.shape()
        )));
    }
    let grad_norm = vector::norm2(&dss_grad(&g, v));
    let min_eig = linalg::sym_eig_min(&dss_hess(&g, &h, v)).map_err(|e| match e {
        LinalgError::NotSymmetric { asymmetry } => {
            CertError::CallbackFailure(format!("hessian not symmetric ({asymmetry:e})"))
        }
        other => other.into(),
    })?;
    let min_eig = if n == 0 { 0.0 } else { min_eig };
    let is_first_order = grad_norm <= tol;
    Ok(Dss2nCheck {
        grad_norm,
        min_eig,
        is_first_order,
        is_2n: is_first_order && min_eig >= -tol,
        is_2s_strict: is_first_order && min_eig > tol,
    })
}

/// First and second derivative data of `min f(x) s.t. c(x) ≥ 0` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlpData {
    pub grad_f: Vec<f64>,
    pub c: Vec<f64>,
    /// Constraint Jacobian, one row per constraint.
    pub jac: DenseMatrix,
    /// Hessian of the Lagrangian `f − sᵀc` in `x`.
    pub hess_l: DenseMatrix,
}

impl NlpData {
    pub fn n(&self) -> usize {
        self.grad_f.len()
    }

    pub fn m(&self) -> usize {
        self.c.len()
    }

    fn validate(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        if self.jac.shape() != (m, n) {
            return Err(CertError::DimensionMismatch(format!(
                "jacobian shape {:?}, expected ({m}, {n})",
                self.jac.shape()
            )));
        }
        if self.hess_l.shape() != (n, n) {
            return Err(CertError::DimensionMismatch(format!(
                "hessian shape {:?}, expected ({n}, {n})",
                self.hess_l.shape()
            )));
        }
        Ok(())
    }

    /// `∇f − Jᵀs`
    pub fn lagrangian_grad(&self, s: &[f64]) -> Vec<f64> {
        vector::sub(&self.grad_f, &self.jac.matvec_t(s))
    }

    /// Indices with `c_i ≤ ζ`.
    pub fn active_set(&self, zeta: f64) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.c[i] <= zeta).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nlp2nMeasures {
    pub eps_foc: f64,
    pub eps_pf: f64,
    pub eps_cs: f64,
    pub eps_pd: f64,
    pub eps_soc: f64,
    pub zeta: f64,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ssv2nMeasures {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
}

fn null_of_active(jac: &DenseMatrix, active: &[usize]) -> Result<DenseMatrix> {
    linalg::nullspace_basis(&jac.select_rows(active)).map_err(|e| match e {
        LinalgError::RankDeficient { index, .. } => CertError::RankDeficientActiveJacobian {
            index: active.get(index).copied().unwrap_or(index),
        },
        other => other.into(),
    })
}

fn min_curvature(h: &DenseMatrix, z: &DenseMatrix) -> Result<f64> {
    if z.cols() == 0 {
        return Ok(0.0);
    }
    let reduced = h.congruence(z).symmetrize();
    Ok((-linalg::sym_eig_min(&reduced)?).max(0.0))
}

/// Approximate second-order measures of `(x, s)` for the constrained problem,
/// given multipliers `a` for the primal-dual feasibility test.
pub fn nlp_approx_2n_measure(data: &NlpData, s: &[f64], a: &[f64], zeta: f64) -> Result<Nlp2nMeasures> {
    data.validate()?;
    let m = data.m();
    check_len("s", s.len(), m)?;
    check_len("a", a.len(), m)?;
    if !(zeta >= 0.0) {
        return Err(CertError::HypothesisViolated(format!("zeta = {zeta} < 0")));
    }
    if a.iter().any(|ai| !(*ai >= 0.0)) {
        return Err(CertError::HypothesisViolated("a must be nonnegative".into()));
    }
    let eps_foc = vector::norm2(&data.lagrangian_grad(s));
    let eps_pf = data.c.iter().fold(0.0_f64, |acc, ci| if -ci > acc { -ci } else { acc });
    let eps_cs = vector::norm2(&vector::hadamard(s, &data.c));
    let eps_pd = (0..m).fold(0.0_f64, |acc, i| {
        let e = -(s[i] + a[i] * data.c[i]);
        if e > acc {
            e
        } else {
            acc
        }
    });
    let z = null_of_active(&data.jac, &data.active_set(zeta))?;
    let eps_soc = min_curvature(&data.hess_l, &z)?;
    Ok(Nlp2nMeasures {
        eps_foc,
        eps_pf,
        eps_cs,
        eps_pd,
        eps_soc,
        zeta,
        a: a.to_vec(),
    })
}

/// Approximate second-order measures of `(x, v, s)` for the squared-slack form.
pub fn ssv_approx_2n_measure(data: &NlpData, v: &[f64], s: &[f64]) -> Result<Ssv2nMeasures> {
    data.validate()?;
    let (n, m) = (data.n(), data.m());
    check_len("v", v.len(), m)?;
    check_len("s", s.len(), m)?;
    let lg = data.lagrangian_grad(s);
    let sv: Vec<f64> = s.iter().zip(v).map(|(si, vi)| 2.0 * si * vi).collect();
    let eps1 = vector::norm2_blocks(&[&lg, &sv]);
    let eps2 = vector::norm2(&vector::sub(&data.c, &vector::square(v)));

    let jssv = data.jac.hstack(&DenseMatrix::from_diag(&vector::scale(v, -2.0)));
    let basis = linalg::nullspace_basis(&jssv)?;
    let mut h = DenseMatrix::zeros(n + m, n + m);
    for i in 0..n {
        h.row_mut(i)[..n].copy_from_slice(data.hess_l.row(i));
    }
    for i in 0..m {
        h[(n + i, n + i)] = 2.0 * s[i];
    }
    let eps3 = min_curvature(&h, &basis)?;
    Ok(Ssv2nMeasures { eps1, eps2, eps3 })
}

/// Transfers an approximate 2N certificate of the squared-slack form to the
/// original constrained problem, with explicit constants.
pub fn thm35_transfer(data: &NlpData, v: &[f64], s: &[f64], eps: Ssv2nMeasures, zeta: f64) -> Result<Nlp2nMeasures> {
    data.validate()?;
    let m = data.m();
    check_len("v", v.len(), m)?;
    check_len("s", s.len(), m)?;
    let Ssv2nMeasures { eps1, eps2, eps3 } = eps;
    for (name, value) in [("eps1", eps1), ("eps2", eps2), ("eps3", eps3)] {
        if !(value > 0.0 && value <= 1.0) {
            return Err(CertError::OutOfRange { name, value });
        }
    }
    if !(zeta >= 2.0 * eps2) {
        return Err(CertError::HypothesisViolated(format!(
            "zeta = {zeta} is below 2·eps2 = {}",
            2.0 * eps2
        )));
    }

    let active = data.active_set(zeta);
    let inactive: Vec<usize> = (0..m).filter(|i| data.c[*i] > zeta).collect();
    let j_act = data.jac.select_rows(&active);
    let j_inact = data.jac.select_rows(&inactive);

    let mut a = vec![0.0; m];
    let mut eps_pd = if inactive.is_empty() {
        0.0
    } else {
        eps1 / (2.0 * zeta).sqrt()
    };
    if !active.is_empty() {
        let qr = HouseholderQr::new(&j_act.transpose());
        let threshold = PINV_RANK_RTOL * data.jac.norm2();
        if active.len() > data.n() {
            return Err(CertError::HypothesisViolated(
                "more approximately active constraints than variables".into(),
            ));
        }
        if let Some((k, _)) = qr.first_small_pivot(threshold) {
            return Err(CertError::HypothesisViolated(format!(
                "active Jacobian is rank deficient (pivot {k})"
            )));
        }
        let c_inf = vector::norm_inf(&data.c);
        for (k, &i) in active.iter().enumerate() {
            let mut e = vec![0.0; active.len()];
            e[k] = 1.0;
            let eta = qr.min_norm_solve_transposed(&e);
            let xi = j_inact.matvec(&eta);
            let curv = vector::dot(&eta, &data.hess_l.matvec(&eta));
            a[i] = 2.0 * curv.max(0.0);
            let eta2 = vector::dot(&eta, &eta);
            let xi2 = vector::dot(&xi, &xi);
            let pd = 0.5 * eps3 * (4.0 * (c_inf + 1.0) * eta2 + 1.0 + 3.0 * xi2)
                + 3.0 * std::f64::consts::SQRT_2 * eps1 / (2.0 * zeta.sqrt()) * xi2.max(1.0)
                + a[i] * eps2;
            eps_pd = eps_pd.max(pd);
        }
    }

    let v_bound = data.c.iter().fold(0.0_f64, |acc, ci| acc.max((ci.abs() + eps2).sqrt()));
    let eps_cs = 0.5 * eps1 * v_bound + eps2 * vector::norm_inf(s);
    let j_norm2 = j_inact.norm2();
    let eps_soc = eps3 + j_norm2 * j_norm2 * (2.0 * eps3 / zeta + std::f64::consts::SQRT_2 * eps1 / zeta.powf(1.5));
    Ok(Nlp2nMeasures {
        eps_foc: eps1,
        eps_pf: eps2,
        eps_cs,
        eps_pd,
        eps_soc,
        zeta,
        a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct L1DssCheck {
    pub ssv_stationary: bool,
    pub original_1p: bool,
}

/// Stationarity of `h(v₊⊙v₊ − v₋⊙v₋) + λ(‖v₊‖² + ‖v₋‖²)` and whether the
/// represented `x` satisfies the subgradient conditions of `h(x) + λ‖x‖₁`.
pub fn l1dss_stationarity_check<G>(h_grad: G, v_plus: &[f64], v_minus: &[f64], lambda: f64, tol: f64) -> L1DssCheck
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    assert!(lambda > 0.0, "lambda must be positive");
    assert_eq!(v_plus.len(), v_minus.len());
    let x = vector::sub(&vector::square(v_plus), &vector::square(v_minus));
    let g = h_grad(&x);
    let mut grad2 = 0.0;
    for i in 0..x.len() {
        let gp = 2.0 * v_plus[i] * g[i] + 2.0 * lambda * v_plus[i];
        let gm = -2.0 * v_minus[i] * g[i] + 2.0 * lambda * v_minus[i];
        grad2 += gp * gp + gm * gm;
    }
    let original_1p = x.iter().zip(&g).all(|(&xi, &gi)| {
        if xi > tol {
            (gi + lambda).abs() <= tol
        } else if xi < -tol {
            (gi - lambda).abs() <= tol
        } else {
            gi.abs() <= lambda + tol
        }
    });
    L1DssCheck {
        ssv_stationary: grad2.sqrt() <= tol,
        original_1p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_residual_examples() {
        // f = ½‖x − (1,−1)‖², ∇f = x − (1,−1)
        let grad = |x: &[f64]| vec![x[0] - 1.0, x[1] + 1.0];
        assert_eq!(bc_prox_residual(&grad(&[1.0, 0.0]), &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(bc_prox_residual(&grad(&[0.0, 0.0]), &[0.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(
            bc_prox_residual(&[1.0], &[1.0, 2.0]),
            Err(CertError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let p = bc_classify(&[2.0, 0.0, 0.0], &[0.0, 3.0, 0.0], 1e-8).unwrap();
        assert_eq!(p.inactive, vec![0]);
        assert_eq!(p.active, vec![1]);
        assert_eq!(p.degenerate, vec![2]);
        let p = bc_classify(&[0.0; 3], &[0.0; 3], 1e-8).unwrap();
        assert_eq!(p.degenerate, vec![0, 1, 2]);
        assert!(matches!(
            bc_classify(&[1.0], &[1.0], 1e-8),
            Err(CertError::NotFirstOrder { .. })
        ));
    }

    #[test]
    fn dss_check_at_minimizer() {
        let grad = |x: &[f64]| vec![x[0] - 1.0, x[1] + 1.0];
        let hess = |_: &[f64]| DenseMatrix::identity(2);
        let r = dss_bc_2n_check(grad, hess, &[1.0, 0.0], 1e-10).unwrap();
        assert_eq!(r.grad_norm, 0.0);
        assert!((r.min_eig - 2.0).abs() < 1e-12);
        assert!(r.is_2n && r.is_2s_strict);
        let h = dss_hess(&grad(&[1.0, 0.0]), &DenseMatrix::identity(2), &[1.0, 0.0]);
        assert_eq!(h, DenseMatrix::from_diag(&[4.0, 2.0]));
    }

    #[test]
    fn dss_check_spurious_saddle() {
        let r = dss_bc_2n_check(|_| vec![-1.0, 0.0], |_| DenseMatrix::zeros(2, 2), &[0.0, 0.0], 1e-10).unwrap();
        assert!(r.is_first_order);
        assert_eq!(r.min_eig, -2.0);
        assert!(!r.is_2n);
    }

    #[test]
    fn dss_check_zero_case() {
        let r = dss_bc_2n_check(|_| vec![0.0; 3], |_| DenseMatrix::zeros(3, 3), &[0.0; 3], 1e-10).unwrap();
        assert!(r.is_2n);
        assert!(!r.is_2s_strict);
    }

    #[test]
    fn dss_check_bad_callback() {
        let r = dss_bc_2n_check(|_| vec![0.0], |_| DenseMatrix::zeros(2, 2), &[0.0; 2], 1e-10);
        assert!(matches!(r, Err(CertError::CallbackFailure(_))));
    }

    fn one_var(x: f64) -> NlpData {
        // f(x) = x, c(x) = x
        NlpData {
            grad_f: vec![1.0],
            c: vec![x],
            jac: DenseMatrix::from_rows(&[[1.0]]),
            hess_l: DenseMatrix::zeros(1, 1),
        }
    }

    #[test]
    fn nlp_measure_hand_example() {
        let m = nlp_approx_2n_measure(&one_var(1e-3), &[1.0], &[0.0], 1e-4).unwrap();
        assert_eq!(m.eps_foc, 0.0);
        assert_eq!(m.eps_pf, 0.0);
        assert!((m.eps_cs - 1e-3).abs() < 1e-18);
        assert_eq!(m.eps_pd, 0.0);
        assert_eq!(m.eps_soc, 0.0);
    }

    #[test]
    fn nlp_measure_vanishes_at_kkt() {
        let m = nlp_approx_2n_measure(&one_var(0.0), &[1.0], &[0.0], 0.0).unwrap();
        assert_eq!([m.eps_foc, m.eps_pf, m.eps_cs, m.eps_pd, m.eps_soc], [0.0; 5]);
    }

    #[test]
    fn nlp_measure_rank_deficient_active_rows() {
        let data = NlpData {
            grad_f: vec![0.0, 0.0],
            c: vec![0.0, 0.0],
            jac: DenseMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]),
            hess_l: DenseMatrix::zeros(2, 2),
        };
        assert!(matches!(
            nlp_approx_2n_measure(&data, &[0.0, 0.0], &[0.0, 0.0], 0.0),
            Err(CertError::RankDeficientActiveJacobian { .. })
        ));
    }

    #[test]
    fn ssv_negative_multiplier_at_zero_slack() {
        // LP: min cᵀx s.t. x ≥ 0 in two variables, with s_2 < 0 at v_2 = 0.
        let data = NlpData {
            grad_f: vec![0.0, -0.5],
            c: vec![0.0, 0.0],
            jac: DenseMatrix::identity(2),
            hess_l: DenseMatrix::zeros(2, 2),
        };
        let m = ssv_approx_2n_measure(&data, &[0.0, 0.0], &[0.0, -0.5]).unwrap();
        assert_eq!(m.eps1, 0.0);
        assert_eq!(m.eps2, 0.0);
        assert!((m.eps3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_single_constraint() {
        let mut data = one_var(0.25);
        data.hess_l = DenseMatrix::from_rows(&[[3.0]]);
        let eps = Ssv2nMeasures {
            eps1: 1e-3,
            eps2: 1e-3,
            eps3: 1e-3,
        };
        let t = thm35_transfer(&data, &[0.5], &[1e-3], eps, 0.5).unwrap();
        assert_eq!(t.a, vec![6.0]);
        assert_eq!(t.eps_foc, 1e-3);
        assert_eq!(t.eps_pf, 1e-3);
        // no inactive constraints: eps_soc reduces to eps3
        assert_eq!(t.eps_soc, 1e-3);
    }

    #[test]
    fn transfer_rejects_bad_inputs() {
        let data = one_var(0.25);
        let ok = Ssv2nMeasures {
            eps1: 0.1,
            eps2: 0.1,
            eps3: 0.1,
        };
        let zero = Ssv2nMeasures { eps1: 0.0, ..ok };
        assert!(matches!(
            thm35_transfer(&data, &[0.5], &[0.0], zero, 0.5),
            Err(CertError::OutOfRange { name: "eps1", .. })
        ));
        assert!(matches!(
            thm35_transfer(&data, &[0.5], &[0.0], ok, 0.1),
            Err(CertError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn transfer_limit_is_zero() {
        let mut data = one_var(0.25);
        data.hess_l = DenseMatrix::from_rows(&[[3.0]]);
        let tiny = Ssv2nMeasures {
            eps1: 1e-300,
            eps2: 1e-300,
            eps3: 1e-300,
        };
        let t = thm35_transfer(&data, &[0.5], &[0.0], tiny, 0.5).unwrap();
        for e in [t.eps_foc, t.eps_pf, t.eps_cs, t.eps_pd, t.eps_soc] {
            assert!(e < 1e-290);
        }
    }

    #[test]
    fn l1_examples() {
        let h = |x: &[f64]| vec![x[0] - 2.0];
        let r = l1dss_stationarity_check(h, &[1.0], &[0.0], 1.0, 1e-12);
        assert!(r.ssv_stationary && r.original_1p);
        let r = l1dss_stationarity_check(|_: &[f64]| vec![0.5], &[0.0], &[0.0], 1.0, 1e-12);
        assert!(r.ssv_stationary && r.original_1p);
        let r = l1dss_stationarity_check(h, &[1.0], &[1.0], 1.0, 1e-8);
        assert!(!r.ssv_stationary);
    }
}
