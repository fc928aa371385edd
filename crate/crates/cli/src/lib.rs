//! Experiment registry and file plumbing behind the `cei` command.

pub mod config;
pub mod emit;
pub mod experiments;

use cei_core::samplers::SampleError;
use cei_core::stats::StatsError;
use cei_core::transforms::TransformError;
use cei_core::PathError;
use thiserror::Error;

pub use config::{ConfigOverrides, ExperimentConfig, Format};
pub use emit::{emit_samples, read_samples, SampleMetadata};
pub use experiments::{default_config, list_experiments, run_experiment, ExperimentInfo, RunOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown experiment {0:?}; see `cei list`")]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
