//! Command-line experiments on top of `plrnet-core`: dataset files,
//! experiment configs, checkpoints, a threaded gradient evaluator and the
//! `generate` / `train` / `eval` / `sweep` commands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod parallel;

pub use config::{ExperimentConfig, LoadedConfig};
pub use error::{CliError, Result};
