use rand::Rng;
use rand_distr::StandardNormal;

use super::basis::{dot, BasisGrid};
use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::scalar::Real;

/// Weights larger than this in magnitude abort learning.
pub const WEIGHT_LIMIT: f64 = 1e8;

/// Linear value function `V(x) = θᵀφ(x)` with its eligibility trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticState<T> {
    pub theta: Vec<T>,
    pub trace: Vec<T>,
    pub alpha: T,
    pub lambda: T,
}

impl<T: Real> CriticState<T> {
    pub fn new(features: usize, alpha: T, lambda: T) -> Result<Self> {
        check_rate("alpha", alpha)?;
        check_decay("lambda_theta", lambda)?;
        Ok(Self {
            theta: vec![T::zero(); features],
            trace: vec![T::zero(); features],
            alpha,
            lambda,
        })
    }

    pub fn value_of(&self, phi: &[T]) -> T {
        dot(&self.theta, phi)
    }

    pub fn reset_trace(&mut self) {
        self.trace.iter_mut().for_each(|z| *z = T::zero());
    }
}

/// Gaussian policy `N(Wᵀφ(x), Σ)` with its eligibility trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorState<T> {
    /// N×m
    pub w: Mat<T>,
    /// N×m
    pub trace: Mat<T>,
    pub beta: T,
    pub lambda: T,
    pub sigma2_initial: T,
    covariance: Mat<T>,
    chol: Mat<T>,
    precision: Mat<T>,
}

impl<T: Real> ActorState<T> {
    pub fn new(features: usize, inputs: usize, beta: T, lambda: T, sigma2: T) -> Result<Self> {
        check_rate("beta", beta)?;
        check_decay("lambda_w", lambda)?;
        if !(sigma2 > T::zero()) {
            return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {sigma2}")));
        }
        let mut actor = Self {
            w: Mat::zeros(features, inputs),
            trace: Mat::zeros(features, inputs),
            beta,
            lambda,
            sigma2_initial: sigma2,
            covariance: Mat::identity(inputs),
            chol: Mat::identity(inputs),
            precision: Mat::identity(inputs),
        };
        actor.set_variance(sigma2)?;
        Ok(actor)
    }

    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    /// Sets `Σ = σ² I`.
    pub fn set_variance(&mut self, sigma2: T) -> Result<()> {
        let m = self.inputs();
        self.set_covariance(Mat::identity(m).scale(sigma2))
    }

    pub fn set_covariance(&mut self, cov: Mat<T>) -> Result<()> {
        let m = self.inputs();
        if cov.shape() != (m, m) {
            return Err(Error::DimensionMismatch {
                context: "ActorState::set_covariance",
                expected: format!("{m}x{m}"),
                actual: format!("{:?}", cov.shape()),
            });
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("policy covariance must be positive definite".into()))?;
        let precision = cov.try_inverse()?.symmetrize();
        self.covariance = cov;
        self.chol = chol;
        self.precision = precision;
        Ok(())
    }

    pub fn covariance(&self) -> &Mat<T> {
        &self.covariance
    }

    pub fn mean(&self, phi: &[T]) -> Vec<T> {
        self.w.tr_mul_vec(phi)
    }

    pub fn reset_trace(&mut self) {
        self.trace.as_mut_slice().iter_mut().for_each(|z| *z = T::zero());
    }

    /// Draws `μ + L z`, `z ~ N(0, I)`, `L Lᵀ = Σ`.
    pub fn sample_with_features<R: Rng + ?Sized>(&self, phi: &[T], rng: &mut R) -> Vec<T> {
        let mu = self.mean(phi);
        let z: Vec<T> = (0..mu.len())
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let noise = self.chol.mul_vec(&z);
        mu.iter().zip(&noise).map(|(&a, &b)| a + b).collect()
    }

    /// `φ (u − μ)ᵀ Σ⁻¹`, the gradient of `log π(u | x)` with respect to W.
    pub fn grad_with_features(&self, u: &[T], phi: &[T]) -> Mat<T> {
        let mu = self.mean(phi);
        let diff: Vec<T> = u.iter().zip(&mu).map(|(&a, &b)| a - b).collect();
        let scaled = self.precision.tr_mul_vec(&diff);
        Mat::from_fn(phi.len(), scaled.len(), |j, k| phi[j] * scaled[k])
    }

    /// Log-density of the Gaussian policy at `u`.
    pub fn log_density_with_features(&self, u: &[T], phi: &[T]) -> T {
        let mu = self.mean(phi);
        let diff: Vec<T> = u.iter().zip(&mu).map(|(&a, &b)| a - b).collect();
        let m = T::from_count(diff.len());
        let log_det: T = (0..self.chol.rows()).map(|i| self.chol[(i, i)].ln()).sum::<T>() * T::two();
        -T::lit(0.5) * (m * (T::two() * T::PI()).ln() + log_det + self.precision.quad_form(&diff))
    }
}

/// Samples `u ~ N(Wᵀφ(x), Σ)`.
pub fn sample_action<T: Real, R: Rng + ?Sized>(
    x: &[T],
    actor: &ActorState<T>,
    grid: &BasisGrid<T>,
    rng: &mut R,
) -> Vec<T> {
    actor.sample_with_features(&grid.features(x), rng)
}

pub fn log_policy_grad<T: Real>(u: &[T], x: &[T], actor: &ActorState<T>, grid: &BasisGrid<T>) -> Mat<T> {
    actor.grad_with_features(u, &grid.features(x))
}

pub fn log_policy_density<T: Real>(u: &[T], x: &[T], actor: &ActorState<T>, grid: &BasisGrid<T>) -> T {
    actor.log_density_with_features(u, &grid.features(x))
}

/// `σ² · (10⁻⁴)^(E / N_epi)`.
pub fn variance_schedule<T: Real>(episode: usize, sigma2: T, episodes: usize) -> T {
    if episodes == 0 || episode == 0 {
        return sigma2;
    }
    if episode == episodes {
        return sigma2 * T::lit(1e-4);
    }
    let frac = T::from_count(episode) / T::from_count(episodes);
    sigma2 * T::lit(1e-4).powf(frac)
}

/// Trace and weight update for one transition.
///
/// `z ← γλ_θ z + ζ φ_now`, `Z ← γλ_W Z + ζ ∇log π(u⁻|x⁻)`, then
/// `θ ← θ + αδz` and `W ← W + βδZ`. The caller applies `ζ ← γζ` afterwards.
#[allow(clippy::too_many_arguments)]
pub fn actor_critic_update<T: Real>(
    critic: &mut CriticState<T>,
    actor: &mut ActorState<T>,
    delta: T,
    phi_now: &[T],
    grad_prev: &Mat<T>,
    zeta: T,
    gamma: T,
) -> Result<()> {
    if !delta.is_finite() {
        return Err(Error::NumericalBlowup(format!("TD error is {delta}")));
    }
    let decay_v = gamma * critic.lambda;
    for (z, &p) in critic.trace.iter_mut().zip(phi_now) {
        *z = decay_v * *z + zeta * p;
    }
    let decay_w = gamma * actor.lambda;
    for (z, &g) in actor.trace.as_mut_slice().iter_mut().zip(grad_prev.as_slice()) {
        *z = decay_w * *z + zeta * g;
    }

    let step_v = critic.alpha * delta;
    for (t, &z) in critic.theta.iter_mut().zip(&critic.trace) {
        *t += step_v * z;
    }
    let step_w = actor.beta * delta;
    let trace = actor.trace.as_slice().to_vec();
    for (w, z) in actor.w.as_mut_slice().iter_mut().zip(trace) {
        *w += step_w * z;
    }

    let limit = T::lit(WEIGHT_LIMIT);
    let theta_max = critic.theta.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if !(theta_max <= limit) || !(actor.w.max_abs() <= limit) {
        return Err(Error::NumericalBlowup(format!(
            "weights diverged (|theta| max {theta_max}, |W| max {})",
            actor.w.max_abs()
        )));
    }
    Ok(())
}

fn check_rate<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_decay<T: Real>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")))
    }
}
