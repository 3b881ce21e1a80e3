//! Contextual multi-armed bandits with least-squares regression oracles.
//!
//! The centerpiece is [`opo`]: optimistic policy optimization that rebuilds
//! each round's policy by replaying exponential-weights updates over cached
//! regressor snapshots, using counterfactual exploration bonuses. Around it
//! sit the regression oracles ([`oracle`]), comparison algorithms
//! ([`baselines`]), synthetic and dataset environments ([`env`]), the
//! interaction loop ([`protocol`]) and the benchmark harness ([`bench`]).

pub mod baselines;
pub mod bench;
pub mod domain;
pub mod env;
pub mod error;
pub mod opo;
pub mod oracle;
pub mod protocol;

pub use error::{BanditError, Result};
