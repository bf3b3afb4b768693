//! Configuration, experiment drivers and file outputs for the two-step
//! controller design: step one (gain learning), step two (residual
//! actor-critic), deterministic comparisons and hyperparameter sweeps.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, Mode};
