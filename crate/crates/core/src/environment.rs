//! Continuous-time plants, RK4 stepping and quadratic cost bookkeeping.

use crate::error::{Error, Result};
use crate::numerics::{rk4_step, Mat};
use crate::scalar::Real;

/// A continuous-time plant `ẋ = f(x, u)` with its equilibrium at the origin.
pub trait Plant<T: Real>: Send + Sync {
    fn state_dim(&self) -> usize;

    fn input_dim(&self) -> usize;

    fn dynamics(&self, x: &[T], u: &[T]) -> Vec<T>;

    /// Post-step state normalization (e.g. angle wrapping). Identity by default.
    fn clamp_state(&self, _x: &mut [T]) {}
}

impl<T: Real, P: Plant<T> + ?Sized> Plant<T> for &P {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }

    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn dynamics(&self, x: &[T], u: &[T]) -> Vec<T> {
        (**self).dynamics(x, u)
    }

    fn clamp_state(&self, x: &mut [T]) {
        (**self).clamp_state(x)
    }
}

impl<T: Real> Plant<T> for Box<dyn Plant<T>> {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }

    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn dynamics(&self, x: &[T], u: &[T]) -> Vec<T> {
        (**self).dynamics(x, u)
    }

    fn clamp_state(&self, x: &mut [T]) {
        (**self).clamp_state(x)
    }
}

/// One zero-order-hold RK4 step of length `ts`, followed by the plant's
/// state clamp.
pub fn step<T: Real, P: Plant<T> + ?Sized>(plant: &P, x: &[T], u: &[T], ts: T) -> Result<Vec<T>> {
    if x.len() != plant.state_dim() || u.len() != plant.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "step",
            expected: format!("state {}, input {}", plant.state_dim(), plant.input_dim()),
            actual: format!("state {}, input {}", x.len(), u.len()),
        });
    }
    let mut next = rk4_step(|s: &[T], v: &[T]| plant.dynamics(s, v), x, u, ts)?;
    plant.clamp_state(&mut next);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams<T> {
    /// length (m)
    pub length: T,
    /// mass (kg)
    pub mass: T,
    /// gravitational acceleration (m/s²)
    pub gravity: T,
    /// viscous friction coefficient
    pub friction: T,
}

impl<T: Real> PendulumParams<T> {
    /// L = 0.5 m, M = 0.15 kg, g = 9.8 m/s², η = 0.05.
    pub fn standard() -> Self {
        Self {
            length: T::lit(0.5),
            mass: T::lit(0.15),
            gravity: T::lit(9.8),
            friction: T::lit(0.05),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.length > T::zero()
            && self.mass > T::zero()
            && self.gravity > T::zero()
            && self.friction >= T::zero();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "pendulum parameters must satisfy L, M, g > 0 and eta >= 0, got {self:?}"
            )))
        }
    }

    #[inline]
    fn inertia(&self) -> T {
        self.mass * self.length * self.length
    }
}

/// `(ξ, (g/L) sin ψ − η/(M L²) ξ + u/(M L²))` for state `(ψ, ξ)`.
pub fn pendulum_dynamics<T: Real>(x: &[T], u: &[T], p: &PendulumParams<T>) -> Vec<T> {
    let (psi, xi) = (x[0], x[1]);
    let inertia = p.inertia();
    vec![
        xi,
        p.gravity / p.length * psi.sin() - p.friction / inertia * xi + u[0] / inertia,
    ]
}

/// Analytic Jacobians `(A, B)` of the pendulum at the upright equilibrium.
pub fn linearize_pendulum<T: Real>(p: &PendulumParams<T>) -> (Mat<T>, Mat<T>) {
    let inertia = p.inertia();
    let a = Mat::from_rows(&[
        [T::zero(), T::one()],
        [p.gravity / p.length, -p.friction / inertia],
    ]);
    let b = Mat::from_rows(&[[T::zero()], [T::one() / inertia]]);
    (a, b)
}

/// Torque-driven inverted pendulum; the angle is wrapped into `[−π, π]`
/// after every step unless wrapping is disabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum<T> {
    pub params: PendulumParams<T>,
    pub wrap_angle: bool,
}

impl<T: Real> Pendulum<T> {
    pub fn new(params: PendulumParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            wrap_angle: true,
        })
    }

    pub fn without_wrap(mut self) -> Self {
        self.wrap_angle = false;
        self
    }

    pub fn linearize(&self) -> (Mat<T>, Mat<T>) {
        linearize_pendulum(&self.params)
    }

    /// `½ M L² ξ² + M g L cos ψ`.
    pub fn energy(&self, x: &[T]) -> T {
        let p = &self.params;
        T::lit(0.5) * p.inertia() * x[1] * x[1] + p.mass * p.gravity * p.length * x[0].cos()
    }
}

impl<T: Real> Plant<T> for Pendulum<T> {
    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn dynamics(&self, x: &[T], u: &[T]) -> Vec<T> {
        pendulum_dynamics(x, u, &self.params)
    }

    fn clamp_state(&self, x: &mut [T]) {
        if self.wrap_angle {
            x[0] = wrap_angle(x[0]);
        }
    }
}

/// Maps an angle into `[−π, π]`.
pub fn wrap_angle<T: Real>(psi: T) -> T {
    let pi = T::PI();
    if psi >= -pi && psi <= pi {
        return psi;
    }
    let two_pi = T::two() * pi;
    psi - two_pi * ((psi + pi) / two_pi).floor()
}

/// Linear time-invariant plant `ẋ = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPlant<T> {
    pub a: Mat<T>,
    pub b: Mat<T>,
}

impl<T: Real> LinearPlant<T> {
    pub fn new(a: Mat<T>, b: Mat<T>) -> Result<Self> {
        if !a.is_square() || b.rows() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "LinearPlant::new",
                expected: "A n×n and B n×m".into(),
                actual: format!("A {:?}, B {:?}", a.shape(), b.shape()),
            });
        }
        Ok(Self { a, b })
    }
}

impl<T: Real> Plant<T> for LinearPlant<T> {
    fn state_dim(&self) -> usize {
        self.a.rows()
    }

    fn input_dim(&self) -> usize {
        self.b.cols()
    }

    fn dynamics(&self, x: &[T], u: &[T]) -> Vec<T> {
        let ax = self.a.mul_vec(x);
        let bu = self.b.mul_vec(u);
        ax.iter().zip(&bu).map(|(&p, &q)| p + q).collect()
    }
}

/// Quadratic weights `Q ⪰ 0` (state) and `R ≻ 0` (input).
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights<T> {
    pub q: Mat<T>,
    pub r: Mat<T>,
}

impl<T: Real> CostWeights<T> {
    pub fn new(q: Mat<T>, r: Mat<T>) -> Result<Self> {
        let tol = T::lit(1e-12);
        if !q.is_symmetric(tol * (T::one() + q.max_abs())) || !r.is_symmetric(tol * (T::one() + r.max_abs())) {
            return Err(Error::InvalidParameter("Q and R must be symmetric".into()));
        }
        let min_q = q.symmetric_eigenvalues()?.first().copied().unwrap_or(T::zero());
        if min_q < -T::lit(1e-12) * (T::one() + q.max_abs()) {
            return Err(Error::InvalidParameter("Q must be positive semi-definite".into()));
        }
        if r.cholesky().is_none() {
            return Err(Error::InvalidParameter("R must be positive definite".into()));
        }
        Ok(Self { q, r })
    }

    /// Q = diag(100, 1), R = 1.
    pub fn pendulum_default() -> Self {
        Self {
            q: Mat::from_diag(&[T::lit(100.0), T::one()]),
            r: Mat::from_diag(&[T::one()]),
        }
    }

    /// `xᵀ Q x + uᵀ R u`.
    pub fn stage_cost(&self, x_next: &[T], u: &[T]) -> T {
        self.q.quad_form(x_next) + self.r.quad_form(u)
    }
}

/// `−(x_nextᵀ Q x_next + uᵀ R u)`.
pub fn reward<T: Real>(x_next: &[T], u: &[T], w: &CostWeights<T>) -> T {
    -w.stage_cost(x_next, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PendulumParams<f64> {
        PendulumParams::standard()
    }

    #[test]
    fn equilibrium_is_fixed() {
        assert_eq!(pendulum_dynamics(&[0.0, 0.0], &[0.0], &params()), vec![0.0, 0.0]);
        let p = Pendulum::new(params()).unwrap();
        assert_eq!(step(&p, &[0.0, 0.0], &[0.0], 0.03).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dynamics_examples() {
        let p = params();
        let d = pendulum_dynamics(&[std::f64::consts::FRAC_PI_2, 0.0], &[0.0], &p);
        assert!(d[0].abs() < 1e-15 && (d[1] - 19.6).abs() < 1e-12);
        let d = pendulum_dynamics(&[0.0, 1.0], &[0.0], &p);
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] + 4.0 / 3.0).abs() < 1e-12);
        let d = pendulum_dynamics(&[0.0, 0.0], &[1.0], &p);
        assert!((d[1] - 80.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn linearization_examples() {
        let (a, b) = linearize_pendulum(&params());
        assert!((a[(1, 0)] - 19.6).abs() < 1e-12);
        assert!((a[(1, 1)] + 4.0 / 3.0).abs() < 1e-12);
        assert!((b[(1, 0)] - 80.0 / 3.0).abs() < 1e-12);

        let mut flat = params();
        flat.gravity = 0.0;
        flat.friction = 0.0;
        let (a, _) = linearize_pendulum(&flat);
        assert_eq!(a.as_slice(), &[0.0, 1.0, 0.0, 0.0]);

        let k0 = Mat::from_rows(&[[-2.87, -2.0]]);
        let (a, b) = linearize_pendulum(&params());
        let acl = &a + &(&b * &k0);
        assert!((acl[(1, 0)] + 56.933_333_333).abs() < 1e-6);
        assert!((acl[(1, 1)] + 54.666_666_667).abs() < 1e-6);
        assert!(crate::numerics::is_hurwitz(&acl));
    }

    #[test]
    fn linearization_matches_finite_differences() {
        let p = params();
        let (a, b) = linearize_pendulum(&p);
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = [0.0, 0.0];
            let mut xm = [0.0, 0.0];
            xp[j] = h;
            xm[j] = -h;
            let fp = pendulum_dynamics(&xp, &[0.0], &p);
            let fm = pendulum_dynamics(&xm, &[0.0], &p);
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - a[(i, j)]).abs() <= 1e-8 * a[(i, j)].abs().max(1.0));
            }
        }
        let fp = pendulum_dynamics(&[0.0, 0.0], &[h], &p);
        let fm = pendulum_dynamics(&[0.0, 0.0], &[-h], &p);
        let fd = (fp[1] - fm[1]) / (2.0 * h);
        assert!((fd - b[(1, 0)]).abs() <= 1e-8 * b[(1, 0)]);
    }

    #[test]
    fn stabilizing_gain_pulls_angle_down() {
        let p = Pendulum::new(params()).unwrap();
        let x = [0.4, 0.0];
        let u = [-2.87 * 0.4];
        let next = step(&p, &x, &u, 0.03).unwrap();
        assert!(next.iter().all(|v| v.is_finite()));
        assert!(next[0] < 0.4);
    }

    #[test]
    fn angle_wrapping() {
        assert!((wrap_angle(3.2) - (3.2 - 2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!((wrap_angle(-3.2) - (-3.2 + 2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(wrap_angle(1.0), 1.0);
        assert!((wrap_angle(7.0 * std::f64::consts::PI).abs() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn reward_examples() {
        let w = CostWeights::<f64>::pendulum_default();
        assert_eq!(reward(&[0.0, 0.0], &[0.0], &w), 0.0);
        assert_eq!(reward(&[1.0, 0.0], &[0.0], &w), -100.0);
        assert!((reward(&[0.1, 0.2], &[0.5], &w) + 1.29).abs() < 1e-12);
    }

    #[test]
    fn cost_weights_validation() {
        assert!(CostWeights::new(Mat::from_diag(&[1.0, 0.0]), Mat::from_diag(&[1.0])).is_ok());
        assert!(CostWeights::new(Mat::from_diag(&[-1.0, 0.0]), Mat::from_diag(&[1.0])).is_err());
        assert!(CostWeights::new(Mat::from_diag(&[1.0, 1.0]), Mat::from_diag(&[0.0])).is_err());
    }

    #[test]
    fn linear_plant_dynamics() {
        let plant = LinearPlant::new(
            Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]),
            Mat::from_rows(&[[0.0], [1.0]]),
        )
        .unwrap();
        assert_eq!(plant.dynamics(&[1.0, 2.0], &[3.0]), vec![2.0, 2.0]);
        assert!(LinearPlant::new(Mat::<f64>::zeros(2, 3), Mat::zeros(2, 1)).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params();
        p.mass = 0.0;
        assert!(Pendulum::new(p).is_err());
    }
}
