//! Config-driven experiment runner built on `vexnorm`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

pub mod config;
pub mod runner;
pub mod sweep;

pub use config::ExperimentConfig;
pub use runner::{run_config, CheckOutcome, Summary};
pub use sweep::{run_sweep, SweepParam, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config field {field}: {message}")]
    Validation { field: String, message: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("csv output failed: {0}")]
    Csv(String),
    #[error("json output failed: {0}")]
    Json(String),
    #[error(transparent)]
    Core(#[from] vexnorm::Error),
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for resource limits, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Argument(_) => 2,
            CliError::Core(vexnorm::Error::Argument(_) | vexnorm::Error::Config(_)) => 2,
            CliError::Core(vexnorm::Error::Resource(_)) => 3,
            _ => 1,
        }
    }
}
