//! Monte Carlo trajectories, estimators and experiment drivers on top of
//! `zeno-core`.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod ld;
pub mod output;
pub mod rng;
pub mod stats;
pub mod surrogate;
pub mod trajectory;
pub mod validate;

pub use config::{Calibration, ExperimentConfig};
pub use error::{LabError, Result};
