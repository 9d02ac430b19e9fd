//! Experiment runner for the oscillator toolkit: configuration, the verification and
//! sweep experiments, and JSON/CSV result records.

pub mod config;
pub mod error;
pub mod experiments;
pub mod record;

pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use error::{LabError, Result};
pub use experiments::{replay, reproduces, run};
pub use record::ResultRecord;
