//! Command-line driver for the DISD simulator: JSON run configs, CSV and
//! JSON result documents, and parallel sweeps over grid points and
//! signaling samples. Outputs are deterministic functions of the config.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
