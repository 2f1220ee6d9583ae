pub mod baselines;
pub mod coop;
pub mod dqn;
pub mod env;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod metrics;
pub mod phy;
pub mod scenario;
pub mod urllc;

pub use error::{Error, Result};
