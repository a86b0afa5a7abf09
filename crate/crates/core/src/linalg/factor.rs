//! Cholesky and quasi-definite LDLᵀ factorizations, and the augmented-system
//! solve shared by the interior-point and SSV-SQP directions.

use super::{vector, DenseMatrix, DiagonalMatrix, LinalgError, Result};

const PIVOT_RTOL: f64 = 1e-14;
const STATIC_REG: f64 = 1e-12;
const MAX_REFINEMENT_STEPS: usize = 8;

/// Lower-triangular Cholesky factor `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(LinalgError::dims("square matrix", format!("{:?}", m.shape())));
        }
        let scale = m.diag().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let threshold = PIVOT_RTOL * scale.max(f64::MIN_POSITIVE);
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let (li, lj) = split_rows(&mut l, i, j);
                let s = m[(i, j)] - vector::dot(&li[..j], &lj[..j]);
                li[j] = s / lj[j];
            }
            let li = l.row(i);
            let pivot = m[(i, i)] - vector::dot(&li[..i], &li[..i]);
            if !(pivot > threshold) {
                return Err(LinalgError::SingularSystem {
                    index: i,
                    pivot,
                    threshold,
                });
            }
            l[(i, i)] = pivot.sqrt();
        }
        Ok(Self { l })
    }

    pub fn factor_l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            y[i] = (y[i] - vector::dot(&row[..i], &y[..i])) / row[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}

/// `M = L D Lᵀ` with unit lower-triangular `L`, computed without pivoting.
/// Intended for quasi-definite matrices, for which every symmetric
/// permutation admits such a factorization.
#[derive(Debug, Clone)]
pub struct Ldlt {
    l: DenseMatrix,
    d: Vec<f64>,
}

impl Ldlt {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        Self::factor_with_threshold(m, PIVOT_RTOL * m.max_abs().max(f64::MIN_POSITIVE))
    }

    /// As [`Ldlt::factor`], rejecting pivots of magnitude below `threshold`.
    pub fn factor_with_threshold(m: &DenseMatrix, threshold: f64) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(LinalgError::dims("square matrix", format!("{:?}", m.shape())));
        }
        let mut l = DenseMatrix::identity(n);
        let mut d = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            for j in 0..i {
                let row_j = l.row(j);
                let s = m[(i, j)] - vector::dot(&w[..j], &row_j[..j]);
                w[j] = s;
                l[(i, j)] = s / d[j];
            }
            let li = l.row(i);
            let pivot = m[(i, i)] - vector::dot(&w[..i], &li[..i]);
            if !(pivot.abs() >= threshold) {
                return Err(LinalgError::SingularSystem {
                    index: i,
                    pivot,
                    threshold,
                });
            }
            d[i] = pivot;
        }
        Ok(Self { l, d })
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn factor_l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            y[i] -= vector::dot(&row[..i], &y[..i]);
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s;
        }
        y
    }
}

/// Borrow row `i` mutably and row `j < i` immutably.
fn split_rows(m: &mut DenseMatrix, i: usize, j: usize) -> (&mut [f64], &[f64]) {
    debug_assert!(j < i);
    let cols = m.cols();
    let (head, tail) = m.as_mut_slice().split_at_mut(i * cols);
    (&mut tail[..cols], &head[j * cols..(j + 1) * cols])
}

/// Which factorization backs [`solve_augmented`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvePath {
    /// Cholesky of the normal matrix `A D⁻¹ Aᵀ`.
    #[default]
    Normal,
    /// LDLᵀ of the full quasi-definite matrix `[-D Aᵀ; A 0]`.
    Augmented,
}

impl std::str::FromStr for SolvePath {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "normal" => Ok(SolvePath::Normal),
            "augmented" => Ok(SolvePath::Augmented),
            other => Err(format!("unknown solver path `{other}` (expected normal|augmented)")),
        }
    }
}

enum Factor {
    Normal(Cholesky),
    Augmented(Ldlt),
}

/// A factorization of `[-D Aᵀ; A 0]` that can be reused for several
/// right-hand sides (the predictor and corrector solves share `D`).
pub struct AugmentedSolve<'a> {
    d: &'a [f64],
    a: &'a DenseMatrix,
    factor: Factor,
}

impl<'a> AugmentedSolve<'a> {
    pub fn new(d: &'a DiagonalMatrix, a: &'a DenseMatrix, path: SolvePath) -> Result<Self> {
        let (m, n) = a.shape();
        if d.len() != n {
            return Err(LinalgError::dims(format!("D of length {n}"), format!("{}", d.len())));
        }
        if let Some(index) = d.diag().iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(LinalgError::SingularSystem {
                index,
                pivot: d.diag()[index],
                threshold: 0.0,
            });
        }
        let factor = match path {
            SolvePath::Normal => {
                let dinv: Vec<f64> = d.diag().iter().map(|x| 1.0 / x).collect();
                Factor::Normal(Cholesky::factor(&a.scaled_gram(&dinv))?)
            }
            SolvePath::Augmented => {
                let k = assemble(d.diag(), a);
                let delta = STATIC_REG * a.max_abs().max(1.0);
                let mut reg = k;
                for i in 0..n {
                    reg[(i, i)] -= delta;
                }
                for i in n..n + m {
                    reg[(i, i)] += delta;
                }
                // quasi-definite: every pivot has magnitude at least δ in exact arithmetic
                Factor::Augmented(Ldlt::factor_with_threshold(&reg, 0.5 * delta)?)
            }
        };
        Ok(Self { d: d.diag(), a, factor })
    }

    fn solve_once(&self, r_top: &[f64], r_bot: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.d.len();
        match &self.factor {
            Factor::Normal(chol) => {
                let dinv_r: Vec<f64> = r_top.iter().zip(self.d).map(|(r, d)| r / d).collect();
                let rhs = vector::add(r_bot, &self.a.matvec(&dinv_r));
                let dlam = chol.solve(&rhs);
                let atl = self.a.matvec_t(&dlam);
                let dx = (0..n).map(|i| (atl[i] - r_top[i]) / self.d[i]).collect();
                (dx, dlam)
            }
            Factor::Augmented(ldl) => {
                let mut rhs = Vec::with_capacity(n + r_bot.len());
                rhs.extend_from_slice(r_top);
                rhs.extend_from_slice(r_bot);
                let mut sol = ldl.solve(&rhs);
                let dlam = sol.split_off(n);
                (sol, dlam)
            }
        }
    }

    /// Residuals `(r_top - (-D dx + Aᵀ dlam), r_bot - A dx)`.
    fn residual(&self, dx: &[f64], dlam: &[f64], r_top: &[f64], r_bot: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let atl = self.a.matvec_t(dlam);
        let top = (0..dx.len())
            .map(|i| r_top[i] - (-self.d[i] * dx[i] + atl[i]))
            .collect();
        let bot = vector::sub(r_bot, &self.a.matvec(dx));
        (top, bot)
    }

    /// Solves `-D dx + Aᵀ dlam = r_top`, `A dx = r_bot`, refining
    /// iteratively against the unregularized system.
    pub fn solve(&self, r_top: &[f64], r_bot: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(r_top.len(), self.d.len());
        assert_eq!(r_bot.len(), self.a.rows());
        let (mut dx, mut dlam) = self.solve_once(r_top, r_bot);
        let rhs_norm = vector::norm2_blocks(&[r_top, r_bot]);
        let (mut et, mut eb) = self.residual(&dx, &dlam, r_top, r_bot);
        let mut err = vector::norm2_blocks(&[&et, &eb]);
        for _ in 0..MAX_REFINEMENT_STEPS {
            if !(err > 1e-15 * rhs_norm) {
                break;
            }
            let (cx, cl) = self.solve_once(&et, &eb);
            let nx = vector::add(&dx, &cx);
            let nl = vector::add(&dlam, &cl);
            let (nt, nb) = self.residual(&nx, &nl, r_top, r_bot);
            let new_err = vector::norm2_blocks(&[&nt, &nb]);
            if !(new_err < err) {
                break;
            }
            let improved = new_err < 0.5 * err;
            (dx, dlam, et, eb, err) = (nx, nl, nt, nb, new_err);
            if !improved {
                break;
            }
        }
        (dx, dlam)
    }
}

/// `[-D Aᵀ; A 0]`
fn assemble(d: &[f64], a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    let mut k = DenseMatrix::zeros(n + m, n + m);
    for i in 0..n {
        k[(i, i)] = -d[i];
    }
    for r in 0..m {
        for (c, &x) in a.row(r).iter().enumerate() {
            k[(n + r, c)] = x;
            k[(c, n + r)] = x;
        }
    }
    k
}

/// Solves the augmented system
///
/// ```text
/// [ -D  Aᵀ ] [ dx   ]   [ r_top ]
/// [  A  0  ] [ dlam ] = [ r_bot ]
/// ```
///
/// for positive diagonal `D` and full-row-rank `A`.
pub fn solve_augmented(
    d: &DiagonalMatrix,
    a: &DenseMatrix,
    r_top: &[f64],
    r_bot: &[f64],
    path: SolvePath,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = a.shape();
    if r_top.len() != n || r_bot.len() != m {
        return Err(LinalgError::dims(
            format!("rhs lengths ({n}, {m})"),
            format!("({}, {})", r_top.len(), r_bot.len()),
        ));
    }
    Ok(AugmentedSolve::new(d, a, path)?.solve(r_top, r_bot))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let m = DenseMatrix::from_rows(&[[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]]);
        let c = Cholesky::factor(&m).unwrap();
        let l = c.factor_l();
        let back = l.matmul(&l.transpose());
        for (x, y) in back.as_slice().iter().zip(m.as_slice()) {
            assert!((x - y).abs() <= 1e-9 * m.max_abs());
        }
        let x = c.solve(&[1.0, 2.0, 3.0]);
        let r = vector::sub(&m.matvec(&x), &[1.0, 2.0, 3.0]);
        assert!(vector::norm2(&r) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(
            Cholesky::factor(&m),
            Err(LinalgError::SingularSystem { index: 1, .. })
        ));
    }

    #[test]
    fn ldlt_reconstructs_quasidefinite() {
        let k = assemble(
            &[2.0, 1.0, 3.0],
            &DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]),
        );
        let f = Ldlt::factor(&k).unwrap();
        let l = f.factor_l();
        let ld = DenseMatrix::from_fn(5, 5, |i, j| l[(i, j)] * f.pivots()[j]);
        let back = ld.matmul(&l.transpose());
        for (x, y) in back.as_slice().iter().zip(k.as_slice()) {
            assert!((x - y).abs() <= 1e-9 * k.max_abs());
        }
        assert!(f.pivots()[..3].iter().all(|&p| p < 0.0));
        assert!(f.pivots()[3..].iter().all(|&p| p > 0.0));
    }

    #[test]
    fn one_by_one_augmented() {
        let d = DiagonalMatrix::new(vec![1.0]);
        let a = DenseMatrix::from_rows(&[[1.0]]);
        for path in [SolvePath::Normal, SolvePath::Augmented] {
            let (dx, dl) = solve_augmented(&d, &a, &[0.0], &[1.0], path).unwrap();
            assert!((dx[0] - 1.0).abs() < 1e-12);
            assert!((dl[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_normal_matrix_is_singular() {
        let d = DiagonalMatrix::new(vec![1.0, 1.0]);
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]);
        let err = solve_augmented(&d, &a, &[0.0, 0.0], &[1.0, 2.0], SolvePath::Normal);
        assert!(matches!(err, Err(LinalgError::SingularSystem { .. })));
    }

    #[test]
    fn nonpositive_scaling_rejected() {
        let d = DiagonalMatrix::new(vec![1.0, 0.0]);
        let a = DenseMatrix::from_rows(&[[1.0, 1.0]]);
        assert!(solve_augmented(&d, &a, &[0.0, 0.0], &[1.0], SolvePath::Augmented).is_err());
    }
}
