//! Command-line driver for the corruption lattice simulator: configuration
//! files, run orchestration, sweeps, checkpoints and file formats.

pub mod app;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod formats;
pub mod run;
pub mod sweep;

pub use error::{CliError, Result};
