//! Configuration, presets and output writing for the `nufrecon` experiment
//! runner.

pub mod config;
pub mod error;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, Method};
pub use error::{CliError, Result};
pub use runner::{run_experiment, run_suite, ExperimentOutcome, SummaryRow};
