use super::GainMatrix;
use crate::environment::Plant;
use crate::error::{Error, Result};
use crate::numerics::{rk4_step, svec_len, svec_quad, window_integrals, Mat, WindowMoments};
use crate::scalar::Real;

/// How the window moments are computed from the simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentRule {
    /// Moments are appended to the state and integrated by the same RK4
    /// step that advances the plant, so they are consistent with the
    /// held input to the integrator's order.
    #[default]
    Integrated,
    /// Trapezoid rule over the sampled `(x, u)` sequence.
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionSettings<T> {
    /// number of windows `l`
    pub windows: usize,
    /// window length `T_dc` (s)
    pub window_length: T,
    /// integration / sampling step inside a window (s)
    pub dt_sample: T,
    /// initial state; the origin when `None`
    pub x0: Option<Vec<T>>,
    pub rule: MomentRule,
}

impl<T: Real> Default for CollectionSettings<T> {
    fn default() -> Self {
        Self {
            windows: 10,
            window_length: T::lit(0.03),
            dt_sample: T::lit(0.003),
            x0: None,
            rule: MomentRule::default(),
        }
    }
}

impl<T: Real> CollectionSettings<T> {
    /// Integration steps per window.
    pub fn steps_per_window(&self) -> Result<usize> {
        if !(self.window_length > T::zero()) || !(self.dt_sample > T::zero()) {
            return Err(Error::InvalidParameter(
                "window length and sample step must be positive".into(),
            ));
        }
        let ratio = self.window_length / self.dt_sample;
        let steps = ratio.round();
        if steps < T::one() || (ratio - steps).abs() > T::lit(1e-6) * ratio {
            return Err(Error::InvalidParameter(format!(
                "window length {} is not an integer multiple of sample step {}",
                self.window_length, self.dt_sample
            )));
        }
        Ok(steps.to_usize().unwrap_or(0))
    }
}

/// `l` windows of trajectory data reduced to endpoint states and moments.
#[derive(Debug, Clone, PartialEq)]
pub struct DataWindowSet<T> {
    pub windows: Vec<WindowMoments<T>>,
    pub window_length: T,
    pub state_dim: usize,
    pub input_dim: usize,
}

impl<T: Real> DataWindowSet<T> {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Unknowns per learning equation: `n(n+1)/2 + m n`.
    pub fn unknowns(&self) -> usize {
        required_windows(self.state_dim, self.input_dim)
    }
}

/// Minimum window count for an overdetermined learning equation.
pub fn required_windows(n: usize, m: usize) -> usize {
    svec_len(n) + m * n
}

/// Drives the plant with `u = K₀ x + ν(t)` and records one moment set per
/// window. The input is held constant over each integration step.
pub fn collect_data<T, P, E>(
    plant: &P,
    k0: &GainMatrix<T>,
    excitation: E,
    settings: &CollectionSettings<T>,
) -> Result<DataWindowSet<T>>
where
    T: Real,
    P: Plant<T> + ?Sized,
    E: Fn(T) -> Vec<T>,
{
    let n = plant.state_dim();
    let m = plant.input_dim();
    if k0.matrix().shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            context: "collect_data",
            expected: format!("K0 {m}x{n}"),
            actual: format!("K0 {:?}", k0.matrix().shape()),
        });
    }
    let required = required_windows(n, m);
    if settings.windows < required {
        return Err(Error::InsufficientWindows {
            count: settings.windows,
            required,
        });
    }
    let steps = settings.steps_per_window()?;
    let dt = settings.dt_sample;
    let mut x = match &settings.x0 {
        Some(x0) if x0.len() == n => x0.clone(),
        Some(x0) => {
            return Err(Error::DimensionMismatch {
                context: "collect_data",
                expected: format!("x0 of length {n}"),
                actual: format!("length {}", x0.len()),
            })
        }
        None => vec![T::zero(); n],
    };

    let input_at = |k: usize, x: &[T]| -> Result<Vec<T>> {
        let t = T::from_count(k) * dt;
        let nu = excitation(t);
        if nu.len() != m {
            return Err(Error::DimensionMismatch {
                context: "collect_data excitation",
                expected: format!("{m} channels"),
                actual: format!("{} channels", nu.len()),
            });
        }
        Ok(k0.apply(x).iter().zip(&nu).map(|(&a, &b)| a + b).collect())
    };

    let mut windows = Vec::with_capacity(settings.windows);
    let mut k = 0usize;
    for _ in 0..settings.windows {
        let x_start = x.clone();
        match settings.rule {
            MomentRule::Integrated => {
                let mut ixx = vec![T::zero(); svec_len(n)];
                let mut ixu = Mat::zeros(n, m);
                for _ in 0..steps {
                    let u = input_at(k, &x)?;
                    let (next, dxx, dxu) = integrated_step(plant, &x, &u, dt)?;
                    for (acc, d) in ixx.iter_mut().zip(dxx) {
                        *acc += d;
                    }
                    for (acc, &d) in ixu.as_mut_slice().iter_mut().zip(&dxu) {
                        *acc += d;
                    }
                    x = next;
                    k += 1;
                }
                windows.push(WindowMoments {
                    ixx,
                    ixu,
                    x_start,
                    x_end: x.clone(),
                });
            }
            MomentRule::Trapezoid => {
                let mut samples = Vec::with_capacity(steps + 1);
                for _ in 0..steps {
                    let u = input_at(k, &x)?;
                    samples.push((x.clone(), u.clone()));
                    let mut next = rk4_step(|s: &[T], v: &[T]| plant.dynamics(s, v), &x, &u, dt)?;
                    plant.clamp_state(&mut next);
                    x = next;
                    k += 1;
                }
                samples.push((x.clone(), input_at(k, &x)?));
                windows.push(window_integrals(&samples, dt)?);
            }
        }
    }

    Ok(DataWindowSet {
        windows,
        window_length: settings.window_length,
        state_dim: n,
        input_dim: m,
    })
}

/// One RK4 step of the plant augmented with `d/dt ∫svec_quad(x) = svec_quad(x)`
/// and `d/dt ∫x uᵀ = x uᵀ`; returns the new state and the step's moment increments.
fn integrated_step<T, P>(plant: &P, x: &[T], u: &[T], dt: T) -> Result<(Vec<T>, Vec<T>, Vec<T>)>
where
    T: Real,
    P: Plant<T> + ?Sized,
{
    let n = x.len();
    let nq = svec_len(n);
    let augmented = |y: &[T], v: &[T]| -> Vec<T> {
        let s = &y[..n];
        let mut dy = plant.dynamics(s, v);
        dy.extend(svec_quad(s));
        for &si in s {
            dy.extend(v.iter().map(|&vj| si * vj));
        }
        dy
    };
    let mut y = x.to_vec();
    y.resize(n + nq + n * u.len(), T::zero());
    let y = rk4_step(augmented, &y, u, dt)?;
    let mut next = y[..n].to_vec();
    plant.clamp_state(&mut next);
    Ok((next, y[n..n + nq].to_vec(), y[n + nq..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{Pendulum, PendulumParams};
    use crate::lqr::ExplorationSignal;

    fn k0() -> GainMatrix<f64> {
        GainMatrix::from_row(&[-2.87, -2.0])
    }

    #[test]
    fn standard_settings_shape() {
        let plant = Pendulum::new(PendulumParams::standard()).unwrap();
        let sig = ExplorationSignal::new(3, 1);
        let data = collect_data(&plant, &k0(), |t| sig.value(t), &CollectionSettings::default()).unwrap();
        assert_eq!(data.len(), 10);
        for w in &data.windows {
            assert_eq!(w.ixx.len(), 3);
            assert_eq!(w.ixu.shape(), (2, 1));
        }
        assert_eq!(data.windows[0].x_start, vec![0.0, 0.0]);
        for pair in data.windows.windows(2) {
            assert_eq!(pair[0].x_end, pair[1].x_start);
        }
    }

    #[test]
    fn unexcited_equilibrium_gives_zero_windows() {
        let plant = Pendulum::new(PendulumParams::standard()).unwrap();
        let data = collect_data(&plant, &k0(), |_| vec![0.0], &CollectionSettings::default()).unwrap();
        for w in &data.windows {
            assert!(w.ixx.iter().all(|&v| v == 0.0));
            assert_eq!(w.ixu.max_abs(), 0.0);
        }
    }

    #[test]
    fn too_few_windows() {
        let plant = Pendulum::new(PendulumParams::standard()).unwrap();
        let settings = CollectionSettings {
            windows: 4,
            ..CollectionSettings::default()
        };
        assert_eq!(
            collect_data(&plant, &k0(), |_| vec![0.0], &settings),
            Err(Error::InsufficientWindows {
                count: 4,
                required: 5
            })
        );
    }

    #[test]
    fn non_integer_window_ratio_rejected() {
        let settings = CollectionSettings::<f64> {
            dt_sample: 0.007,
            ..CollectionSettings::default()
        };
        assert!(settings.steps_per_window().is_err());
        assert_eq!(CollectionSettings::<f64>::default().steps_per_window(), Ok(10));
    }

    #[test]
    fn moment_rules_agree_on_smooth_input() {
        let plant = Pendulum::new(PendulumParams::standard()).unwrap();
        let fine = CollectionSettings {
            dt_sample: 0.0001,
            x0: Some(vec![0.1, 0.0]),
            ..CollectionSettings::default()
        };
        let excite = |t: f64| vec![(5.0 * t).sin()];
        let a = collect_data(&plant, &k0(), excite, &fine).unwrap();
        let b = collect_data(
            &plant,
            &k0(),
            excite,
            &CollectionSettings {
                rule: MomentRule::Trapezoid,
                ..fine.clone()
            },
        )
        .unwrap();
        for (wa, wb) in a.windows.iter().zip(&b.windows) {
            for (p, q) in wa.ixx.iter().zip(&wb.ixx) {
                assert!((p - q).abs() < 1e-4 * p.abs().max(1e-6), "{p} {q}");
            }
        }
    }
}
