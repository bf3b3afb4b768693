use super::{dense, Mat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `Aᵀ P + P A + M = 0` for symmetric `P`.
///
/// Builds the `n² × n²` Kronecker system `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P) = −vec(M)`
/// and solves it densely; fine for the state dimensions used here.
pub fn solve_lyapunov<T: Real>(a_cl: &Mat<T>, m: &Mat<T>) -> Result<Mat<T>> {
    let n = a_cl.rows();
    if !a_cl.is_square() || m.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "solve_lyapunov",
            expected: format!("{n}x{n} operands"),
            actual: format!("A {:?}, M {:?}", a_cl.shape(), m.shape()),
        });
    }
    let tol = T::lit(1e-10) * (T::one() + m.max_abs());
    if !m.is_symmetric(tol) {
        return Err(Error::Asymmetric(
            m.asymmetry().and_then(|a| a.to_f64()).unwrap_or(f64::NAN),
        ));
    }

    // Unknown P[k][l] lives at k*n + l; equation (i, j) is
    // Σ_k A[k][i] P[k][j] + Σ_k P[i][k] A[k][j] = −M[i][j].
    let nn = n * n;
    let mut kron = Mat::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                kron[(row, k * n + j)] += a_cl[(k, i)];
                kron[(row, i * n + k)] += a_cl[(k, j)];
            }
        }
    }
    let rhs: Vec<T> = m.as_slice().iter().map(|&v| -v).collect();
    let p = match dense::solve_linear(&kron, &rhs) {
        Ok(p) => p,
        Err(Error::Singular) => return Err(Error::SingularLyapunov),
        Err(e) => return Err(e),
    };
    let p = Mat::new(n, n, p).map_err(|_| Error::SingularLyapunov)?;
    Ok(p.symmetrize())
}

/// `‖Aᵀ P + P A + M‖_F`.
pub fn lyapunov_residual<T: Real>(a_cl: &Mat<T>, p: &Mat<T>, m: &Mat<T>) -> T {
    let at = a_cl.transpose();
    let lhs = &(&(&at * p) + &(p * a_cl)) + m;
    lhs.frobenius_norm()
}

/// Whether every eigenvalue of `A` has negative real part.
///
/// Closed forms for n ≤ 2; otherwise uses the Lyapunov characterization
/// (`Aᵀ P + P A = −I` has a positive definite solution).
pub fn is_hurwitz<T: Real>(a: &Mat<T>) -> bool {
    if !a.is_square() || !a.is_finite() {
        return false;
    }
    match a.rows() {
        0 => true,
        1 => a[(0, 0)] < T::zero(),
        2 => {
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            a.trace() < T::zero() && det > T::zero()
        }
        n => match solve_lyapunov(a, &Mat::identity(n)) {
            Ok(p) => p.cholesky().is_some(),
            Err(_) => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let p = solve_lyapunov(&Mat::<f64>::from_rows(&[[-1.0]]), &Mat::from_rows(&[[2.0]])).unwrap();
        assert!((p[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_identity() {
        let a = Mat::from_diag(&[-1.0, -1.0]);
        let q = Mat::from_diag(&[100.0, 1.0]);
        let p = solve_lyapunov(&a, &q).unwrap();
        assert!((&p - &Mat::from_diag(&[50.0, 0.5])).max_abs() < 1e-13);
    }

    #[test]
    fn companion_matrix() {
        let a = Mat::from_rows(&[[0.0, 1.0], [-1.0, -1.0]]);
        let m = Mat::identity(2);
        let p = solve_lyapunov(&a, &m).unwrap();
        let expected = Mat::from_rows(&[[1.5, 0.5], [0.5, 1.0]]);
        assert!((&p - &expected).max_abs() < 1e-13);
        assert!(lyapunov_residual(&a, &p, &m) < 1e-12);
    }

    #[test]
    fn singular_when_eigenvalues_cancel() {
        // eigenvalues ±1 sum to zero
        let a = Mat::from_diag(&[1.0, -1.0]);
        assert_eq!(
            solve_lyapunov(&a, &Mat::identity(2)),
            Err(Error::SingularLyapunov)
        );
        let zero = Mat::<f64>::zeros(1, 1);
        assert_eq!(
            solve_lyapunov(&zero, &Mat::identity(1)),
            Err(Error::SingularLyapunov)
        );
    }

    #[test]
    fn rejects_asymmetric_weight() {
        let m = Mat::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(
            solve_lyapunov(&Mat::from_diag(&[-1.0, -2.0]), &m),
            Err(Error::Asymmetric(_))
        ));
    }

    #[test]
    fn hurwitz_checks() {
        assert!(is_hurwitz(&Mat::from_rows(&[[0.0, 1.0], [-2.0, -3.0]])));
        assert!(!is_hurwitz(&Mat::from_rows(&[[0.0, 1.0], [19.6, -1.3]])));
        assert!(is_hurwitz(&Mat::from_diag(&[-1.0, -2.0, -0.5])));
        assert!(!is_hurwitz(&Mat::from_diag(&[-1.0, -2.0, 0.5])));
        // rotation block with positive real part
        let a = Mat::from_rows(&[[0.1, 5.0, 0.0], [-5.0, 0.1, 0.0], [0.0, 0.0, -1.0]]);
        assert!(!is_hurwitz(&a));
        let a = Mat::from_rows(&[[-0.1, 5.0, 0.0], [-5.0, -0.1, 0.0], [1.0, 0.0, -1.0]]);
        assert!(is_hurwitz(&a));
    }
}
