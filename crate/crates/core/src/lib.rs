//! Trajectory and scheduling design for a rotary-wing UAV serving ground
//! nodes over a probabilistic LoS channel with Rician fading and lognormal
//! shadowing.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod expected_se;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod output;
pub mod sca;
pub mod stats;
pub mod validation;

pub use error::{PlanError, Result};
