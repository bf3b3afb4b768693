use super::GainMatrix;
use crate::environment::CostWeights;
use crate::error::{Error, Result};
use crate::numerics::{is_hurwitz, solve_lyapunov, Mat};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct KleinmanResult<T> {
    pub k_star: GainMatrix<T>,
    pub p_star: Mat<T>,
    /// `Pᵢ` for every evaluated policy, in order
    pub p_history: Vec<Mat<T>>,
    pub iterations: usize,
}

/// Model-based policy iteration on a known `(A, B)`: alternate the
/// Lyapunov solve `AᵢᵀPᵢ + PᵢAᵢ + Q + KᵢᵀRKᵢ = 0` with `Kᵢ₊₁ = −R⁻¹BᵀPᵢ`
/// until `‖Pᵢ − Pᵢ₋₁‖_F < eps`.
pub fn kleinman_iteration<T: Real>(
    a: &Mat<T>,
    b: &Mat<T>,
    weights: &CostWeights<T>,
    k0: &GainMatrix<T>,
    eps: T,
    max_iter: usize,
) -> Result<KleinmanResult<T>> {
    let n = a.rows();
    let m = b.cols();
    if !a.is_square() || b.rows() != n || k0.matrix().shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            context: "kleinman_iteration",
            expected: format!("A {n}x{n}, B {n}x{m}, K0 {m}x{n}"),
            actual: format!("A {:?}, B {:?}, K0 {:?}", a.shape(), b.shape(), k0.matrix().shape()),
        });
    }
    let r_inv = weights.r.try_inverse()?;
    let gain_map = &(&r_inv * &b.transpose()).scale(-T::one());

    let mut k = k0.clone();
    let mut p_history: Vec<Mat<T>> = Vec::new();
    let mut last_change = T::infinity();
    for i in 0..max_iter {
        let a_cl = k.closed_loop(a, b);
        if !is_hurwitz(&a_cl) {
            return Err(Error::NotHurwitz);
        }
        let km = k.matrix();
        let kernel = &weights.q + &(&(&km.transpose() * &weights.r) * km);
        let p = solve_lyapunov(&a_cl, &kernel)?;
        k = GainMatrix::new(gain_map * &p)?;

        let done = p_history.last().is_some_and(|prev| {
            last_change = (&p - prev).frobenius_norm();
            last_change < eps
        });
        p_history.push(p);
        if done {
            let p_star = p_history.last().cloned().unwrap_or_else(|| Mat::zeros(n, n));
            return Ok(KleinmanResult {
                k_star: k,
                p_star,
                p_history,
                iterations: i + 1,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        last_change: last_change.to_f64().unwrap_or(f64::NAN),
    })
}
