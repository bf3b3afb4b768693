use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// Effective rank of the regressor.
    pub rank: usize,
    /// Singular values of the regressor, descending.
    pub singular_values: Vec<T>,
    /// `‖regressor · solution − rhs‖₂`.
    pub residual_norm: T,
}

/// Minimum-residual solution of an overdetermined system.
///
/// The regressor is factored with a one-sided Jacobi SVD (orthogonal
/// rotations only, never the normal equations). Rank deficiency is an
/// error, since it means the data cannot identify every unknown.
pub fn solve_least_squares<T: Real>(regressor: &Mat<T>, rhs: &[T]) -> Result<LeastSquares<T>> {
    let (r, c) = regressor.shape();
    if rhs.len() != r {
        return Err(Error::DimensionMismatch {
            context: "solve_least_squares",
            expected: format!("rhs of length {r}"),
            actual: format!("length {}", rhs.len()),
        });
    }
    if r < c {
        return Err(Error::RankDeficient {
            rank: r,
            required: c,
        });
    }
    if !regressor.is_finite() || rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solve_least_squares"));
    }

    let (u, sigma, v) = jacobi_svd(regressor);
    let smax = sigma.iter().copied().fold(T::zero(), T::max);
    let cutoff = T::lit(RANK_TOLERANCE) * smax;
    let rank = sigma.iter().filter(|&&s| s > cutoff && s > T::zero()).count();
    if rank < c {
        return Err(Error::RankDeficient { rank, required: c });
    }

    // x = Σ_j (u_jᵀ b / σ_j²) v_j, with u_j the unnormalized column σ_j û_j.
    let mut solution = vec![T::zero(); c];
    for j in 0..c {
        let s = sigma[j];
        let proj: T = (0..r).map(|i| u[(i, j)] * rhs[i]).sum::<T>() / (s * s);
        for (k, x) in solution.iter_mut().enumerate() {
            *x += proj * v[(k, j)];
        }
    }

    let fitted = regressor.mul_vec(&solution);
    let residual_norm = fitted
        .iter()
        .zip(rhs)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt();

    let mut singular_values = sigma;
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(LeastSquares {
        solution,
        rank,
        singular_values,
        residual_norm,
    })
}

/// One-sided Jacobi: rotates the columns of `A` until mutually orthogonal.
/// Returns `(A V, σ, V)` where column norms of `A V` are the singular values.
fn jacobi_svd<T: Real>(a: &Mat<T>) -> (Mat<T>, Vec<T>, Mat<T>) {
    let (r, c) = a.shape();
    let mut u = a.clone();
    let mut v = Mat::identity(c);
    let eps = T::epsilon();

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for i in 0..r {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::two() * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                for i in 0..r {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = cs * up - sn * uq;
                    u[(i, q)] = sn * up + cs * uq;
                }
                for i in 0..c {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = cs * vp - sn * vq;
                    v[(i, q)] = sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma = (0..c)
        .map(|j| (0..r).map(|i| u[(i, j)] * u[(i, j)]).sum::<T>().sqrt())
        .collect();
    (u, sigma, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let ls = solve_least_squares(&Mat::<f64>::identity(2), &[3.0, 4.0]).unwrap();
        assert!((ls.solution[0] - 3.0).abs() < 1e-15);
        assert!((ls.solution[1] - 4.0).abs() < 1e-15);
        assert_eq!(ls.rank, 2);
    }

    #[test]
    fn overdetermined_mean() {
        let a = Mat::<f64>::from_rows(&[[1.0], [1.0]]);
        let ls = solve_least_squares(&a, &[1.0, 3.0]).unwrap();
        assert!((ls.solution[0] - 2.0).abs() < 1e-15);
        assert!((ls.residual_norm - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rank_one_is_rejected() {
        let a = Mat::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        assert_eq!(
            solve_least_squares(&a, &[1.0, 0.0, -1.0]),
            Err(Error::RankDeficient {
                rank: 1,
                required: 2
            })
        );
    }

    #[test]
    fn zero_regressor_is_rank_zero() {
        let a = Mat::<f64>::zeros(6, 5);
        assert_eq!(
            solve_least_squares(&a, &[0.0; 6]),
            Err(Error::RankDeficient {
                rank: 0,
                required: 5
            })
        );
    }

    #[test]
    fn underdetermined_is_rejected() {
        let a = Mat::<f64>::zeros(1, 2);
        assert!(matches!(
            solve_least_squares(&a, &[1.0]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn matches_normal_equations_on_well_conditioned_data() {
        let a = Mat::<f64>::from_rows(&[
            [1.0, 0.5, -2.0],
            [0.3, 2.0, 1.0],
            [-1.0, 1.0, 0.7],
            [2.0, -0.4, 0.1],
            [0.5, 0.5, 0.5],
        ]);
        let b = [1.0, -2.0, 0.5, 3.0, 0.25];
        let ls = solve_least_squares(&a, &b).unwrap();
        let at = a.transpose();
        let normal = &at * &a;
        let atb = a.tr_mul_vec(&b);
        let direct = super::super::solve_linear(&normal, &atb).unwrap();
        for (x, y) in ls.solution.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = Mat::<f32>::from_rows(&[[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]);
        let ls = solve_least_squares(&a, &[1.0, 2.0, 2.0]).unwrap();
        assert!((ls.solution[0] - 1.0).abs() < 1e-5);
        assert!((ls.solution[1] - 1.0).abs() < 1e-5);
    }
}
