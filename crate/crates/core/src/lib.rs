//! Model-free two-step optimal control.
//!
//! Step one learns a linear state-feedback gain for an unknown plant from
//! excited trajectory data by least-squares policy iteration. Step two
//! trains a nonlinear residual policy with an actor-critic learner whose
//! output is added to that gain's control.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for typical use.

// `!(x > 0)` checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actor_critic;
pub mod environment;
mod error;
pub mod lqr;
pub mod numerics;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mat64 = numerics::Mat<f64>;
pub type Mat32 = numerics::Mat<f32>;
pub type Gain64 = lqr::GainMatrix<f64>;
pub type Gain32 = lqr::GainMatrix<f32>;
pub type Pendulum64 = environment::Pendulum<f64>;
pub type Pendulum32 = environment::Pendulum<f32>;
pub type CostWeights64 = environment::CostWeights<f64>;
pub type BasisGrid64 = actor_critic::BasisGrid<f64>;
pub type TrainConfig64 = actor_critic::TrainConfig<f64>;
pub type EpisodeConfig64 = actor_critic::EpisodeConfig<f64>;
