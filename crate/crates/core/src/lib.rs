//! Planning information-acquisition actions in finite POMDPs with
//! belief-dependent rewards.
//!
//! The crate checks structural assumptions on a model, computes myopic
//! lower and upper policy bounds from a reward-transform linear program,
//! and runs a branch-and-bound planner that restricts each belief node to
//! the actions between those bounds.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the common choices.

pub mod cli;
pub mod domains;
pub mod filter;
pub mod linalg;
pub mod lp;
pub mod mlr;
pub mod model;
pub mod planner;
pub mod rewards;
pub mod scalar;
pub mod structure;

pub use filter::Belief;
pub use linalg::Matrix;
pub use mlr::{ActionInterval, BoundCertificate, BoundMode, CertificateMode, Direction};
pub use model::{PomdpModel, RewardSpec};
pub use rewards::UncertaintyKind;
pub use scalar::Scalar;

pub type ModelF64 = PomdpModel<f64>;
pub type ModelF32 = PomdpModel<f32>;
pub type BeliefF64 = Belief<f64>;
pub type BeliefF32 = Belief<f32>;
pub type CertificateF64 = BoundCertificate<f64>;
pub type CertificateF32 = BoundCertificate<f32>;
