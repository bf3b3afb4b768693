//! Offline, model-free design of a linear state-feedback gain from
//! excited trajectory data, plus the model-based Kleinman iteration used
//! as ground truth.

mod data;
mod exploration;
mod gain;
mod kleinman;
mod learning;

pub use data::{collect_data, required_windows, CollectionSettings, DataWindowSet, MomentRule};
pub use exploration::{
    exploration_signal, ExplorationSignal, DEFAULT_AMPLITUDE, DEFAULT_FREQUENCY_RANGE, DEFAULT_TONES,
};
pub use gain::GainMatrix;
pub use kleinman::{kleinman_iteration, KleinmanResult};
pub use learning::{assemble_learning_equations, policy_iteration, PolicyIterationReport, DEFAULT_MAX_ITER};
