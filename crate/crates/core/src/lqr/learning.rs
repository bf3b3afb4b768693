use super::{DataWindowSet, GainMatrix};
use crate::environment::CostWeights;
use crate::error::{Error, Result};
use crate::numerics::{quad_moment_matrix, smat, solve_least_squares, svec_len, svec_quad, svec_unchecked, Mat};
use crate::scalar::Real;

/// Guard on the number of policy iterations.
pub const DEFAULT_MAX_ITER: usize = 50;

/// Builds the overdetermined system for the unknowns
/// `z = (svec(Pᵢ), vec_rows(Kᵢ₊₁))`, one row per data window.
///
/// Row for a window `[t − T, t]`:
///
/// ```text
/// (d(x(t)) − d(x(t−T))) · svec(P) + 2 ∫ (u − Kᵢx)ᵀ R Kᵢ₊₁ x dτ = −∫ xᵀ (Q + KᵢᵀRKᵢ) x dτ
/// ```
///
/// Both integrals are linear in the stored moments, so the data set is
/// reused unchanged for every iteration.
pub fn assemble_learning_equations<T: Real>(
    data: &DataWindowSet<T>,
    k_i: &GainMatrix<T>,
    weights: &CostWeights<T>,
) -> Result<(Mat<T>, Vec<T>)> {
    let n = data.state_dim;
    let m = data.input_dim;
    let k = k_i.matrix();
    if k.shape() != (m, n) || weights.q.shape() != (n, n) || weights.r.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            context: "assemble_learning_equations",
            expected: format!("K {m}x{n}, Q {n}x{n}, R {m}x{m}"),
            actual: format!(
                "K {:?}, Q {:?}, R {:?}",
                k.shape(),
                weights.q.shape(),
                weights.r.shape()
            ),
        });
    }
    let np = svec_len(n);
    let cols = np + m * n;

    let kt = k.transpose();
    let cost_kernel = &weights.q + &(&(&kt * &weights.r) * k);
    let cost_svec = svec_unchecked(&cost_kernel);

    let mut regressor = Mat::zeros(data.len(), cols);
    let mut rhs = Vec::with_capacity(data.len());
    for (row, w) in data.windows.iter().enumerate() {
        let d_end = svec_quad(&w.x_end);
        let d_start = svec_quad(&w.x_start);
        for c in 0..np {
            regressor[(row, c)] = d_end[c] - d_start[c];
        }

        // ∫ x (u − Kᵢx)ᵀ R dτ = (Ixu − Ixx Kᵢᵀ) R, an n×m matrix
        let second_moment = quad_moment_matrix(&w.ixx)?;
        let cross = &(&w.ixu - &(&second_moment * &kt)) * &weights.r;
        for a in 0..m {
            for b in 0..n {
                regressor[(row, np + a * n + b)] = T::two() * cross[(b, a)];
            }
        }

        let integral_cost: T = w.ixx.iter().zip(&cost_svec).map(|(&p, &q)| p * q).sum();
        rhs.push(-integral_cost);
    }
    Ok((regressor, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyIterationReport<T> {
    pub k_final: GainMatrix<T>,
    pub p_final: Mat<T>,
    /// number of least-squares solves performed
    pub iterations: usize,
    pub p_history: Vec<Mat<T>>,
    pub k_history: Vec<GainMatrix<T>>,
    /// `‖Pᵢ − Pᵢ₋₁‖_F` for i ≥ 1
    pub p_changes: Vec<T>,
    pub converged: bool,
    /// effective regressor rank at each iteration
    pub ranks: Vec<usize>,
}

/// Model-free policy iteration over one shared data set.
///
/// Stops once `‖Pᵢ − Pᵢ₋₁‖_F < eps` for some `i ≥ 1`; reports
/// [`Error::NotConverged`] if `max_iter` solves pass without that.
pub fn policy_iteration<T: Real>(
    data: &DataWindowSet<T>,
    k0: &GainMatrix<T>,
    weights: &CostWeights<T>,
    eps: T,
    max_iter: usize,
) -> Result<PolicyIterationReport<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let n = data.state_dim;
    let m = data.input_dim;
    let np = svec_len(n);

    let mut k = k0.clone();
    let mut p_history: Vec<Mat<T>> = Vec::new();
    let mut k_history = vec![k0.clone()];
    let mut p_changes = Vec::new();
    let mut ranks = Vec::new();
    let mut last_change = T::infinity();

    for i in 0..max_iter {
        let (regressor, rhs) = assemble_learning_equations(data, &k, weights)?;
        let ls = solve_least_squares(&regressor, &rhs)?;
        ranks.push(ls.rank);
        let p = smat(&ls.solution[..np])?.symmetrize();
        let k_next = GainMatrix::new(Mat::new(m, n, ls.solution[np..].to_vec())?)?;
        if !p.is_finite() {
            return Err(Error::NumericalBlowup("policy iteration produced non-finite P".into()));
        }

        let converged = match p_history.last() {
            Some(prev) => {
                last_change = (&p - prev).frobenius_norm();
                p_changes.push(last_change);
                last_change < eps
            }
            None => false,
        };
        p_history.push(p.clone());
        k_history.push(k_next.clone());
        k = k_next;

        if converged {
            return Ok(PolicyIterationReport {
                k_final: k,
                p_final: p,
                iterations: i + 1,
                p_history,
                k_history,
                p_changes,
                converged: true,
                ranks,
            });
        }
    }

    Err(Error::NotConverged {
        iterations: max_iter,
        last_change: last_change.to_f64().unwrap_or(f64::NAN),
    })
}
