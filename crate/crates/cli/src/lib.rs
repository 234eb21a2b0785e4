//! Configuration loading, command orchestration and artifact output for the
//! `nls-ist` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, Command, RunOptions, Summary};
pub use config::{load_config, ConfigError, RunConfig};
