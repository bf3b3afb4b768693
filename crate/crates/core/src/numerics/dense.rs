use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `A X = B` in place (B is overwritten with X) by Gaussian
/// elimination with partial pivoting.
///
/// A pivot below `n · ε · max|A|` is treated as exact singularity.
pub(crate) fn solve_in_place<T: Real>(mut a: Mat<T>, b: &mut Mat<T>) -> Result<()> {
    let n = a.rows();
    debug_assert!(a.is_square() && b.rows() == n);
    let nrhs = b.cols();
    let tiny = T::from_count(n.max(1)) * T::epsilon() * a.max_abs();

    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= tiny || pivot == T::zero() {
            return Err(Error::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
            }
            for j in 0..nrhs {
                let tmp = b[(col, j)];
                b[(col, j)] = b[(pivot_row, j)];
                b[(pivot_row, j)] = tmp;
            }
        }
        let p = a[(col, col)];
        for r in (col + 1)..n {
            let factor = a[(r, col)] / p;
            if factor == T::zero() {
                continue;
            }
            a[(r, col)] = T::zero();
            for j in (col + 1)..n {
                let v = a[(col, j)];
                a[(r, j)] -= factor * v;
            }
            for j in 0..nrhs {
                let v = b[(col, j)];
                b[(r, j)] -= factor * v;
            }
        }
    }

    for col in (0..n).rev() {
        let p = a[(col, col)];
        for j in 0..nrhs {
            let mut s = b[(col, j)];
            for k in (col + 1)..n {
                s -= a[(col, k)] * b[(k, j)];
            }
            b[(col, j)] = s / p;
        }
    }
    Ok(())
}

/// Solves the square system `A x = b`.
pub fn solve_linear<T: Real>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "solve_linear",
            expected: format!("square system with {} rows", b.len()),
            actual: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let mut rhs = Mat::column(b);
    solve_in_place(a.clone(), &mut rhs)?;
    Ok(rhs.into_vec())
}
