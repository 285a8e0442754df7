//! Small symmetric-matrix helpers shared by the statistics and model code.
//!
//! Determinants of sums-of-squares matrices are accumulated in the log
//! domain so that products of up to ~30 of them stay well scaled.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative pivot threshold: a Cholesky pivot at or below
/// `PIVOT_RTOL * max diagonal` marks the matrix as singular.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Lower Cholesky factor with a scale-aware pivot check.
///
/// The empty matrix factors trivially (its determinant is 1 by convention).
pub fn cholesky(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut l = DMatrix::zeros(n, n);
    if n == 0 {
        return Ok(l);
    }
    let max_diag = (0..n).map(|i| m[(i, i)]).fold(0.0_f64, f64::max);
    let floor = PIVOT_RTOL * max_diag.max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= floor {
            return Err(Error::SingularMatrix { name: name.to_string() });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// log det of a symmetric positive definite matrix via Cholesky.
pub fn spd_logdet(m: &DMatrix<f64>, name: &str) -> Result<f64> {
    let l = cholesky(m, name)?;
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>())
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let l = cholesky(m, name)?;
    let n = l.nrows();
    let mut inv = DMatrix::identity(n, n);
    // forward substitution L X = I, then backward L^T Y = X
    for col in 0..n {
        for i in 0..n {
            let mut s = inv[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = inv[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    // symmetrize against roundoff
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

/// True when `m` admits a Cholesky factorization under the standard threshold.
pub fn is_spd(m: &DMatrix<f64>) -> bool {
    cholesky(m, "_probe").is_ok()
}

/// Select the principal submatrix of `m` on the index set `idx`.
pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let k = idx.len();
    DMatrix::from_fn(k, k, |i, j| m[(idx[i], idx[j])])
}
