use crate::error::{Error, Result};
use crate::scalar::Real;

/// One classical fourth-order Runge-Kutta step with the input held
/// constant over the step.
pub fn rk4_step<T, F>(dynamics: F, state: &[T], input: &[T], dt: T) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T], &[T]) -> Vec<T>,
{
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("rk4 step size must be positive, got {dt}")));
    }
    let half = dt * T::lit(0.5);
    let sixth = dt / T::lit(6.0);
    let offset = |base: &[T], k: &[T], h: T| -> Vec<T> {
        base.iter().zip(k).map(|(&b, &d)| b + h * d).collect()
    };

    let k1 = dynamics(state, input);
    let k2 = dynamics(&offset(state, &k1, half), input);
    let k3 = dynamics(&offset(state, &k2, half), input);
    let k4 = dynamics(&offset(state, &k3, dt), input);

    let next: Vec<T> = (0..state.len())
        .map(|i| state[i] + sixth * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]))
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBlowup(
            "state became non-finite during integration".into(),
        ));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_dynamics_leave_state_unchanged() {
        let s = [0.3, -1.2];
        let next = rk4_step(|_x: &[f64], _u: &[f64]| vec![0.0, 0.0], &s, &[], 0.03).unwrap();
        assert_eq!(next, s.to_vec());
    }

    #[test]
    fn exponential_matches_quartic_taylor() {
        let h: f64 = 0.1;
        let next = rk4_step(|x: &[f64], _u: &[f64]| vec![x[0]], &[1.0], &[], h).unwrap();
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((next[0] - taylor).abs() < 1e-15);
        assert!((next[0] - 1.1051708333333334).abs() < 1e-15);
    }

    #[test]
    fn held_input_integrates_exactly() {
        let next = rk4_step(|_x: &[f64], u: &[f64]| vec![u[0]], &[0.0], &[2.0], 0.5).unwrap();
        assert!((next[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn blowup_is_reported() {
        let r = rk4_step(|x: &[f64], _u: &[f64]| vec![x[0] * 1e300], &[1e10], &[], 1.0);
        assert!(matches!(r, Err(Error::NumericalBlowup(_))));
    }

    #[test]
    fn rejects_nonpositive_step() {
        assert!(rk4_step(|x: &[f64], _u: &[f64]| x.to_vec(), &[1.0], &[], 0.0).is_err());
    }
}
