//! Symmetric eigenvalues by Householder tridiagonalization followed by the
//! implicit QL iteration.

use super::{DenseMatrix, LinalgError, Result};

const SYMMETRY_RTOL: f64 = 1e-12;
const MAX_QL_SWEEPS: usize = 60;

fn check_symmetric(m: &DenseMatrix) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(LinalgError::dims("square matrix", format!("{:?}", m.shape())));
    }
    if !m.is_finite() {
        let index = m.as_slice().iter().position(|x| !x.is_finite()).unwrap_or(0);
        return Err(LinalgError::NonFinite { index });
    }
    let asymmetry = m.asymmetry();
    if asymmetry > SYMMETRY_RTOL {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Reduces `a` in place; returns (diagonal, subdiagonal) with `e[0] = 0`.
fn tridiagonalize(mut a: DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let mut f = a[(i, l)];
                let mut g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                f = 0.0;
                for j in 0..=l {
                    g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[(i, i)];
    }
    if n > 0 {
        e[0] = 0.0;
    }
    (d, e)
}

fn implicit_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(LinalgError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let (mut d, mut e) = tridiagonalize(m.symmetrize());
    implicit_ql(&mut d, &mut e)?;
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// Smallest eigenvalue; `+∞` for an empty matrix.
pub fn sym_eig_min(m: &DenseMatrix) -> Result<f64> {
    Ok(sym_eigenvalues(m)?.first().copied().unwrap_or(f64::INFINITY))
}

/// Largest eigenvalue; `-∞` for an empty matrix.
pub fn sym_eig_max(m: &DenseMatrix) -> Result<f64> {
    Ok(sym_eigenvalues(m)?.last().copied().unwrap_or(f64::NEG_INFINITY))
}
