#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng as _;
use sqvar::linalg::{vector, DenseMatrix};
use sqvar::optcert::NlpData;
use sqvar::rng;

/// Dense LU with partial pivoting, used as an independent oracle.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        assert!(m[p][k] != 0.0, "singular oracle matrix");
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

/// Central differences of a scalar function.
pub fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central differences of a vector function, one column per variable.
pub fn fd_jac(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> DenseMatrix {
    let n = x.len();
    let m = f(x).len();
    let mut jac = DenseMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300).max(1.0)
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    let e = rel_err(a, b);
    assert!(e <= tol, "relative error {e:e} > {tol:e}\n  got  {a:?}\n  want {b:?}");
}

/// Augmented matrix `[−D Aᵀ; A 0]`.
pub fn augmented(d: &[f64], a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    DenseMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => {
            if i == j {
                -d[i]
            } else {
                0.0
            }
        }
        (true, false) => a[(j - n, i)],
        (false, true) => a[(i - n, j)],
        (false, false) => 0.0,
    })
}

/// Convex QP `½xᵀQx + bᵀx` with a prescribed solution: `x*` has `k` zero
/// entries whose gradient components are strictly positive.
pub struct KnownQp {
    pub q: DenseMatrix,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
}

pub fn known_qp(n: usize, k: usize, seed: u64) -> KnownQp {
    let mut g = rng::stream(seed, rng::STREAM_TEST);
    let f = DenseMatrix::from_row_major(n, n, rng::normal_vec(&mut g, n * n)).unwrap();
    let q = f.transpose().matmul(&f).add(&DenseMatrix::identity(n).scale(0.1));
    let mut x = rng::uniform_vec(&mut g, n, 0.5, 2.0);
    let mut grad = vec![0.0; n];
    for i in 0..k {
        x[i] = 0.0;
        grad[i] = g.random_range(0.5..2.0);
    }
    let b = vector::sub(&grad, &q.matvec(&x));
    KnownQp { q, b, x }
}

impl KnownQp {
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        vector::add(&self.q.matvec(x), &self.b)
    }
}

pub fn random_nlp(
    n: usize,
    m_active: usize,
    m_inactive: usize,
    delta: f64,
    curvature: f64,
    seed: u64,
) -> (NlpData, Vec<f64>, Vec<f64>) {
    let m = m_active + m_inactive;
    let mut g = rng::stream(seed, rng::STREAM_TEST);
    let jac = DenseMatrix::from_row_major(m, n, rng::normal_vec(&mut g, m * n)).unwrap();
    let mut c = vec![0.0; m];
    let mut s = vec![0.0; m];
    for i in 0..m {
        if i < m_active {
            s[i] = g.random_range(0.5..2.0);
        } else {
            c[i] = g.random_range(0.5..2.0);
        }
    }
    let h = DenseMatrix::from_row_major(n, n, rng::normal_vec(&mut g, n * n)).unwrap();
    // curvature = 0 gives an indefinite Hessian, > 0 a PSD one shifted down by `curvature`
    let hess_l = if curvature > 0.0 {
        h.transpose()
            .matmul(&h)
            .scale(1.0 / n as f64)
            .sub(&DenseMatrix::identity(n).scale(curvature))
    } else {
        h.add(&h.transpose()).scale(0.5)
    };
    let mut grad_f = jac.matvec_t(&s);
    let pert = rng::normal_vec(&mut g, n + 2 * m);
    for i in 0..n {
        grad_f[i] += delta * pert[i];
    }
    let mut v = vec![0.0; m];
    for i in 0..m {
        c[i] += delta * pert[n + i].abs();
        v[i] = c[i].sqrt() + delta * pert[n + m + i];
        s[i] += delta * pert[n + i];
    }
    (NlpData { grad_f, c, jac, hess_l }, v, s)
}
