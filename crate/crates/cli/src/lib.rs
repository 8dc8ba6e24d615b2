//! Command-line driver for vortexlab experiments.

pub mod acceptance;
pub mod config;
pub mod driver;
pub mod error;
pub mod experiments;
pub mod registry;
pub mod report;
pub mod svg;

pub use error::CliError;
pub use registry::{Experiment, Registry, RunOptions};
pub use driver::run_cli;
