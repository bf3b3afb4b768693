//! Half-vectorization of symmetric matrices.
//!
//! Entries are stacked row by row from the upper triangle:
//! `(M₁₁, M₁₂, …, M₁ₙ, M₂₂, …, Mₙₙ)`. The quadratic regressor doubles
//! the off-diagonal products so that `svec_quad(x) · svec(P) = xᵀ P x`.

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetry tolerance accepted by [`svec`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[inline]
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Recovers `n` from `n(n+1)/2`, if the length is triangular.
pub fn svec_dim(len: usize) -> Option<usize> {
    let mut n = 0;
    while svec_len(n) < len {
        n += 1;
    }
    (svec_len(n) == len).then_some(n)
}

pub fn svec<T: Real>(m: &Mat<T>) -> Result<Vec<T>> {
    let asym = m.asymmetry().ok_or_else(|| Error::DimensionMismatch {
        context: "svec",
        expected: "square matrix".into(),
        actual: format!("{}x{}", m.rows(), m.cols()),
    })?;
    if asym > T::lit(SYMMETRY_TOLERANCE) {
        return Err(Error::Asymmetric(asym.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(svec_unchecked(m))
}

/// Upper-triangular stacking without the symmetry check.
pub(crate) fn svec_unchecked<T: Real>(m: &Mat<T>) -> Vec<T> {
    let n = m.rows();
    let mut out = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        for j in i..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn smat<T: Real>(v: &[T]) -> Result<Mat<T>> {
    let n = svec_dim(v.len()).ok_or_else(|| Error::DimensionMismatch {
        context: "smat",
        expected: "triangular number of entries".into(),
        actual: format!("{}", v.len()),
    })?;
    let mut m = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    Ok(m)
}

/// Regressor `d(x)` with `d(x) · svec(P) = xᵀ P x` for every symmetric `P`.
pub fn svec_quad<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let mut out = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        out.push(x[i] * x[i]);
        for j in (i + 1)..n {
            out.push(T::two() * x[i] * x[j]);
        }
    }
    out
}

/// Converts an accumulated `∫ svec_quad(x)` back into the symmetric
/// second-moment matrix `∫ x xᵀ` (off-diagonals halved).
pub fn quad_moment_matrix<T: Real>(ixx: &[T]) -> Result<Mat<T>> {
    let mut m = smat(ixx)?;
    let n = m.rows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] *= half;
            }
        }
    }
    Ok(m)
}
