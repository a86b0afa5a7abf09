use super::{DenseMatrix, LinalgError, Result};

/// Householder QR with column pivoting, `B P = Q R`, for a `p × q` matrix.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    /// Packed `R` in the upper triangle; reflectors live in `reflectors`.
    r: DenseMatrix,
    reflectors: Vec<(Vec<f64>, f64)>,
    perm: Vec<usize>,
}

impl HouseholderQr {
    pub fn new(b: &DenseMatrix) -> Self {
        let (p, q) = b.shape();
        let mut r = b.clone();
        let mut perm: Vec<usize> = (0..q).collect();
        let steps = p.min(q);
        let mut reflectors = Vec::with_capacity(steps);
        for k in 0..steps {
            let best = (k..q)
                .map(|j| (j, (k..p).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>()))
                .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
                .0;
            if best != k {
                perm.swap(k, best);
                for i in 0..p {
                    let row = r.row_mut(i);
                    row.swap(k, best);
                }
            }
            let x: Vec<f64> = (k..p).map(|i| r[(i, k)]).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                reflectors.push((vec![0.0; p - k], 0.0));
                continue;
            }
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x;
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|a| a * a).sum();
            let beta = 2.0 / vtv;
            for j in k..q {
                let s: f64 = (k..p).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * beta;
                if s != 0.0 {
                    for i in k..p {
                        r[(i, j)] -= s * v[i - k];
                    }
                }
            }
            r[(k, k)] = alpha;
            for i in k + 1..p {
                r[(i, k)] = 0.0;
            }
            reflectors.push((v, beta));
        }
        Self {
            rows: p,
            cols: q,
            r,
            reflectors,
            perm,
        }
    }

    /// Column permutation: column `j` of `B P` is column `perm[j]` of `B`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|k| self.r[(k, k)]).collect()
    }

    /// Index of the first diagonal entry of `R` below `threshold`, if any.
    pub fn first_small_pivot(&self, threshold: f64) -> Option<(usize, f64)> {
        self.r_diag()
            .into_iter()
            .enumerate()
            .find(|(_, d)| !(d.abs() >= threshold))
    }

    fn reflect(&self, k: usize, y: &mut [f64]) {
        let (v, beta) = &self.reflectors[k];
        if *beta == 0.0 {
            return;
        }
        let s: f64 = v.iter().zip(&y[k..]).map(|(a, b)| a * b).sum::<f64>() * beta;
        for (yi, vi) in y[k..].iter_mut().zip(v) {
            *yi -= s * vi;
        }
    }

    /// `Q y`
    pub fn apply_q(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = y.to_vec();
        for k in (0..self.reflectors.len()).rev() {
            self.reflect(k, &mut out);
        }
        out
    }

    /// `Qᵀ y`
    pub fn apply_qt(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = y.to_vec();
        for k in 0..self.reflectors.len() {
            self.reflect(k, &mut out);
        }
        out
    }

    /// Columns `from..p` of the full orthogonal factor.
    pub fn q_columns(&self, from: usize) -> DenseMatrix {
        let p = self.rows;
        let mut out = DenseMatrix::zeros(p, p.saturating_sub(from));
        for j in from..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            let col = self.apply_q(&e);
            for i in 0..p {
                out[(i, j - from)] = col[i];
            }
        }
        out
    }

    /// For the factorization of `B = Jᵀ` with full column rank, returns the
    /// minimum-norm solution of `J x = e`, i.e. `J† e = Q₁ R⁻ᵀ Pᵀ e`.
    pub fn min_norm_solve_transposed(&self, e: &[f64]) -> Vec<f64> {
        let q = self.cols;
        assert_eq!(e.len(), q);
        assert!(q <= self.rows);
        // R is q×q upper; solve Rᵀ z = Pᵀ e by forward substitution.
        let pe: Vec<f64> = self.perm.iter().map(|&j| e[j]).collect();
        let mut z = vec![0.0; self.rows];
        for i in 0..q {
            let mut s = pe[i];
            for k in 0..i {
                s -= self.r[(k, i)] * z[k];
            }
            z[i] = s / self.r[(i, i)];
        }
        self.apply_q(&z)
    }
}

/// Orthonormal basis of `{z : A z = 0}` for a full-row-rank `A` (`m × n`).
/// Returns an `n × (n − m)` matrix; `m = 0` gives the identity.
pub fn nullspace_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if m == 0 {
        return Ok(DenseMatrix::identity(n));
    }
    let threshold = 1e-12 * a.norm_fro();
    if m > n {
        return Err(LinalgError::RankDeficient {
            index: n,
            pivot: 0.0,
            threshold,
        });
    }
    let qr = HouseholderQr::new(&a.transpose());
    if let Some((index, pivot)) = qr.first_small_pivot(threshold) {
        return Err(LinalgError::RankDeficient {
            index,
            pivot,
            threshold,
        });
    }
    Ok(qr.q_columns(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal(z: &DenseMatrix, tol: f64) -> bool {
        let g = z.transpose().matmul(z);
        let i = DenseMatrix::identity(g.rows());
        g.sub(&i).max_abs() <= tol
    }

    #[test]
    fn one_dimensional_nullspace() {
        let z = nullspace_basis(&DenseMatrix::from_rows(&[[1.0, 1.0]])).unwrap();
        assert_eq!(z.shape(), (2, 1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z[(0, 0)].abs() - h).abs() < 1e-14);
        assert!((z[(0, 0)] + z[(1, 0)]).abs() < 1e-14);
    }

    #[test]
    fn square_full_rank_has_empty_nullspace() {
        let z = nullspace_basis(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(z.shape(), (2, 0));
    }

    #[test]
    fn no_rows_gives_identity() {
        let z = nullspace_basis(&DenseMatrix::zeros(0, 3)).unwrap();
        assert_eq!(z, DenseMatrix::identity(3));
    }

    #[test]
    fn rank_deficient_rows_rejected() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]);
        assert!(matches!(
            nullspace_basis(&a),
            Err(LinalgError::RankDeficient { index: 1, .. })
        ));
    }

    #[test]
    fn qr_reconstructs_permuted_input() {
        let b = DenseMatrix::from_rows(&[[1.0, 4.0, -2.0], [0.5, -1.0, 3.0], [2.0, 0.0, 1.0], [-1.0, 2.0, 0.5]]);
        let qr = HouseholderQr::new(&b);
        for (j, &pj) in qr.perm().iter().enumerate() {
            let mut rcol = vec![0.0; 4];
            for i in 0..=j {
                rcol[i] = qr.r[(i, j)];
            }
            let col = qr.apply_q(&rcol);
            for i in 0..4 {
                assert!((col[i] - b[(i, pj)]).abs() < 1e-12);
            }
        }
        assert!(orthonormal(&qr.q_columns(0), 1e-13));
    }

    #[test]
    fn pseudo_inverse_solves_underdetermined_system() {
        let j = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0, 1.0], [0.0, 1.0, -1.0, 3.0]]);
        let qr = HouseholderQr::new(&j.transpose());
        let x = qr.min_norm_solve_transposed(&[1.0, 0.0]);
        let jx = j.matvec(&x);
        assert!((jx[0] - 1.0).abs() < 1e-12 && jx[1].abs() < 1e-12);
        // minimum norm: x lies in the row space, so it is orthogonal to null(J)
        let z = nullspace_basis(&j).unwrap();
        assert!(z.matvec_t(&x).iter().all(|v| v.abs() < 1e-12));
    }
}
