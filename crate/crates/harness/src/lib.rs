//! Experiment orchestration for the `poincare` command: planted data, per-seed training,
//! run records, bounds and benchmarks.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod record;

pub use error::{CliError, CliResult};
