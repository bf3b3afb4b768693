//! Online actor-critic with eligibility traces over Gaussian RBF
//! features, running in parallel with a fixed linear gain.

mod basis;
mod episode;
mod learner;

pub use basis::{policy_mean, value, BasisGrid};
pub use episode::{
    rollout, run_episode, train, ActorStep, CriticTrace, EpisodeConfig, EpisodeResult, PenaltyRule, Rollout, TrainConfig,
    TrainOutcome,
};
pub use learner::{
    actor_critic_update, log_policy_density, log_policy_grad, sample_action, variance_schedule, ActorState,
    CriticState, WEIGHT_LIMIT,
};
