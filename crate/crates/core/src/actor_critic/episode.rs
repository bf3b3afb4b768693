use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basis::BasisGrid;
use super::learner::{actor_critic_update, variance_schedule, ActorState, CriticState};
use crate::environment::{step, CostWeights, Plant};
use crate::error::{Error, Result};
use crate::lqr::GainMatrix;
use crate::numerics::Mat;
use crate::scalar::Real;

/// Episode abort rule: `|x[coordinate]| ≥ bound` yields `reward` and a
/// zero bootstrap value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyRule<T> {
    pub coordinate: usize,
    pub bound: T,
    pub reward: T,
}

impl<T: Real> PenaltyRule<T> {
    /// `|ψ| ≥ 0.5 rad` → reward −100.
    pub fn pendulum() -> Self {
        Self {
            coordinate: 0,
            bound: T::lit(0.5),
            reward: T::lit(-100.0),
        }
    }

    pub fn triggered(&self, x: &[T]) -> bool {
        x[self.coordinate].abs() >= self.bound
    }
}

/// Which state the critic trace accumulates at each update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CriticTrace {
    /// `φ(x)` of the state just observed, as the pseudocode is written.
    /// Credits the TD error to the successor state; diverges on the
    /// pendulum preset.
    Current,
    /// `φ(x⁻)` of the state the TD error belongs to (ordinary TD(λ)).
    #[default]
    Previous,
}

/// How the actor learning rate evolves as the policy variance decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActorStep {
    /// `β` throughout.
    Fixed,
    /// `β σ²_E / σ²`: keeps the step in `W` proportional to the exploration
    /// scale, since the score `φ(u − μ)ᵀΣ⁻¹` grows like `1/σ_E`.
    #[default]
    VarianceScaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig<T> {
    /// sampling period `T_s` (s)
    pub ts: T,
    /// episode duration `T_epi` (s)
    pub t_epi: T,
    pub x0: Vec<T>,
    pub gamma: T,
    pub weights: CostWeights<T>,
    pub penalty: Option<PenaltyRule<T>>,
    pub critic_trace: CriticTrace,
}

impl<T: Real> EpisodeConfig<T> {
    /// `T_s = 0.03`, `T_epi = 3`, `x0 = (0.4, 0)`, `γ = 0.9`, pendulum penalty.
    pub fn pendulum() -> Self {
        Self {
            ts: T::lit(0.03),
            t_epi: T::lit(3.0),
            x0: vec![T::lit(0.4), T::zero()],
            gamma: T::lit(0.9),
            weights: CostWeights::pendulum_default(),
            penalty: Some(PenaltyRule::pendulum()),
            critic_trace: CriticTrace::default(),
        }
    }

    /// `T_epi / T_s`, rounded.
    pub fn steps(&self) -> usize {
        (self.t_epi / self.ts).round().to_usize().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ts > T::zero()) || !(self.t_epi >= self.ts) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < T_s <= T_epi, got T_s = {}, T_epi = {}",
                self.ts, self.t_epi
            )));
        }
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeResult<T> {
    /// `Σ (x_{k+1}ᵀ Q x_{k+1} + u_kᵀ R u_k)` over executed steps
    pub cost_j: T,
    pub steps_taken: usize,
    pub terminated_by_penalty: bool,
    /// sum of the rewards fed to the learner, penalty included
    pub reward_sum: T,
}

/// Runs one learning episode of the parallel controller `u = K x + u_RL`
/// (`u = u_RL` when `gain` is `None`), updating critic and actor online.
pub fn run_episode<T, P, R>(
    plant: &P,
    gain: Option<&GainMatrix<T>>,
    critic: &mut CriticState<T>,
    actor: &mut ActorState<T>,
    grid: &BasisGrid<T>,
    cfg: &EpisodeConfig<T>,
    rng: &mut R,
) -> Result<EpisodeResult<T>>
where
    T: Real,
    P: Plant<T> + ?Sized,
    R: Rng + ?Sized,
{
    let steps = cfg.steps();
    let gamma = cfg.gamma;
    critic.reset_trace();
    actor.reset_trace();
    let mut zeta = T::one();

    let mut x = cfg.x0.clone();
    let mut phi = grid.features(&x);
    let linear = |x: &[T]| gain.map(|k| k.apply(x));

    let mut cost = T::zero();
    let mut reward_sum = T::zero();
    for k in 0..steps {
        let u_rl = actor.sample_with_features(&phi, rng);
        let grad = actor.grad_with_features(&u_rl, &phi);
        let u = match linear(&x) {
            Some(ul) => ul.iter().zip(&u_rl).map(|(&a, &b)| a + b).collect(),
            None => u_rl,
        };

        let x_next = step(plant, &x, &u, cfg.ts)?;
        let stage = cfg.weights.stage_cost(&x_next, &u);
        cost += stage;
        let penalized = cfg.penalty.as_ref().is_some_and(|p| p.triggered(&x_next));

        let phi_next = grid.features(&x_next);
        let (r, bootstrap) = match (&cfg.penalty, penalized) {
            (Some(p), true) => (p.reward, T::zero()),
            _ => (-stage, critic.value_of(&phi_next)),
        };
        reward_sum += r;
        let delta = r + gamma * bootstrap - critic.value_of(&phi);
        let trace_phi = match cfg.critic_trace {
            CriticTrace::Current => &phi_next,
            CriticTrace::Previous => &phi,
        };
        actor_critic_update(critic, actor, delta, trace_phi, &grad, zeta, gamma)?;
        zeta *= gamma;

        if penalized {
            return Ok(EpisodeResult {
                cost_j: cost,
                steps_taken: k + 1,
                terminated_by_penalty: true,
                reward_sum,
            });
        }
        x = x_next;
        phi = phi_next;
    }

    Ok(EpisodeResult {
        cost_j: cost,
        steps_taken: steps,
        terminated_by_penalty: false,
        reward_sum,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub episode: EpisodeConfig<T>,
    pub alpha: T,
    pub beta: T,
    pub lambda_theta: T,
    pub lambda_w: T,
    /// initial policy variance σ²
    pub sigma2: T,
    /// number of episodes `N_epi`
    pub episodes: usize,
    pub actor_step: ActorStep,
}

impl<T: Real> TrainConfig<T> {
    /// α = 0.05, β = 0.001, λ = 0.99, σ² = 0.05, 5000 episodes.
    pub fn pendulum() -> Self {
        Self {
            episode: EpisodeConfig::pendulum(),
            alpha: T::lit(0.05),
            beta: T::lit(0.001),
            lambda_theta: T::lit(0.99),
            lambda_w: T::lit(0.99),
            sigma2: T::lit(0.05),
            episodes: 5000,
            actor_step: ActorStep::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    pub theta: Vec<T>,
    pub w: Mat<T>,
    pub curve: Vec<EpisodeResult<T>>,
}

/// `N_epi` episodes from θ = 0, W = 0, each warm-started from the
/// previous one, with the policy variance decayed per episode.
pub fn train<T, P>(
    plant: &P,
    gain: Option<&GainMatrix<T>>,
    grid: &BasisGrid<T>,
    cfg: &TrainConfig<T>,
    seed: u64,
) -> Result<TrainOutcome<T>>
where
    T: Real,
    P: Plant<T> + ?Sized,
{
    cfg.episode.validate()?;
    let n = grid.len();
    let m = plant.input_dim();
    if grid.state_dim() != plant.state_dim() || cfg.episode.x0.len() != plant.state_dim() {
        return Err(Error::DimensionMismatch {
            context: "train",
            expected: format!("state dimension {}", plant.state_dim()),
            actual: format!("grid {}, x0 {}", grid.state_dim(), cfg.episode.x0.len()),
        });
    }
    if let Some(k) = gain {
        if k.matrix().shape() != (m, plant.state_dim()) {
            return Err(Error::DimensionMismatch {
                context: "train",
                expected: format!("gain {m}x{}", plant.state_dim()),
                actual: format!("{:?}", k.matrix().shape()),
            });
        }
    }
    let mut critic = CriticState::new(n, cfg.alpha, cfg.lambda_theta)?;
    let mut actor = ActorState::new(n, m, cfg.beta, cfg.lambda_w, cfg.sigma2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = Vec::with_capacity(cfg.episodes);

    for e in 0..cfg.episodes {
        let sigma2_e = variance_schedule(e, cfg.sigma2, cfg.episodes);
        actor.set_variance(sigma2_e)?;
        if cfg.actor_step == ActorStep::VarianceScaled {
            actor.beta = cfg.beta * sigma2_e / cfg.sigma2;
        }
        let res = run_episode(plant, gain, &mut critic, &mut actor, grid, &cfg.episode, &mut rng)
            .map_err(|err| match err {
                Error::NumericalBlowup(msg) => Error::NumericalBlowup(format!("episode {e}: {msg}")),
                other => other,
            })?;
        curve.push(res);
    }

    Ok(TrainOutcome {
        theta: critic.theta,
        w: actor.w,
        curve,
    })
}

/// Deterministic closed-loop trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout<T> {
    pub cost_j: T,
    pub steps_taken: usize,
    /// whether the penalty boundary was reached at any step
    pub hit_penalty_boundary: bool,
    /// `x_0 … x_steps`
    pub states: Vec<Vec<T>>,
    /// `u_0 … u_{steps−1}`
    pub inputs: Vec<Vec<T>>,
}

impl<T: Real> Rollout<T> {
    pub fn final_state(&self) -> &[T] {
        self.states.last().map_or(&[], Vec::as_slice)
    }
}

/// Runs `u = K x + Wᵀφ(x)` without exploration or learning over the full
/// episode horizon. The penalty boundary is recorded but does not stop
/// the rollout, so a controller that loses the pendulum pays for it.
pub fn rollout<T, P>(
    plant: &P,
    gain: Option<&GainMatrix<T>>,
    policy: Option<(&Mat<T>, &BasisGrid<T>)>,
    cfg: &EpisodeConfig<T>,
) -> Result<Rollout<T>>
where
    T: Real,
    P: Plant<T> + ?Sized,
{
    cfg.validate()?;
    let steps = cfg.steps();
    let m = plant.input_dim();
    let mut x = cfg.x0.clone();
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps);
    states.push(x.clone());
    let mut cost = T::zero();
    let mut hit = false;
    for _ in 0..steps {
        let mut u = gain.map_or_else(|| vec![T::zero(); m], |k| k.apply(&x));
        if let Some((w, grid)) = policy {
            for (ui, ri) in u.iter_mut().zip(w.tr_mul_vec(&grid.features(&x))) {
                *ui += ri;
            }
        }
        let x_next = step(plant, &x, &u, cfg.ts)?;
        cost += cfg.weights.stage_cost(&x_next, &u);
        hit |= cfg.penalty.as_ref().is_some_and(|p| p.triggered(&x_next));
        states.push(x_next.clone());
        inputs.push(u);
        x = x_next;
    }
    Ok(Rollout {
        cost_j: cost,
        steps_taken: steps,
        hit_penalty_boundary: hit,
        states,
        inputs,
    })
}
