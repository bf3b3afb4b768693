use super::{svec_quad, Mat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Iteration-independent moments of one data window. Together with the
/// endpoint states they determine every learning-equation row for any gain.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowMoments<T> {
    /// `∫ svec_quad(x(τ)) dτ`
    pub ixx: Vec<T>,
    /// `∫ x(τ) u(τ)ᵀ dτ`, n×m
    pub ixu: Mat<T>,
    pub x_start: Vec<T>,
    pub x_end: Vec<T>,
}

/// Trapezoid-rule moments over uniformly spaced `(x, u)` samples.
pub fn window_integrals<T: Real>(samples: &[(Vec<T>, Vec<T>)], dt_sample: T) -> Result<WindowMoments<T>> {
    if samples.len() < 2 {
        return Err(Error::EmptyWindow(samples.len()));
    }
    if !(dt_sample > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "sample spacing must be positive, got {dt_sample}"
        )));
    }
    let n = samples[0].0.len();
    let m = samples[0].1.len();
    if let Some((x, u)) = samples.iter().find(|(x, u)| x.len() != n || u.len() != m) {
        return Err(Error::DimensionMismatch {
            context: "window_integrals",
            expected: format!("state {n}, input {m}"),
            actual: format!("state {}, input {}", x.len(), u.len()),
        });
    }

    let mut ixx = vec![T::zero(); n * (n + 1) / 2];
    let mut ixu = Mat::zeros(n, m);
    let last = samples.len() - 1;
    for (k, (x, u)) in samples.iter().enumerate() {
        let w = if k == 0 || k == last {
            dt_sample * T::lit(0.5)
        } else {
            dt_sample
        };
        for (acc, d) in ixx.iter_mut().zip(svec_quad(x)) {
            *acc += w * d;
        }
        for i in 0..n {
            for j in 0..m {
                ixu[(i, j)] += w * x[i] * u[j];
            }
        }
    }

    Ok(WindowMoments {
        ixx,
        ixu,
        x_start: samples[0].0.clone(),
        x_end: samples[last].0.clone(),
    })
}
