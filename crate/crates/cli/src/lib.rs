//! Library half of the `pfunc` binary: config parsing and validation, the
//! fixture registry, and the job orchestrator. The binary in `main.rs` is a
//! thin argument-parsing shell over these modules, which keeps every behavior
//! reachable from integration tests without spawning processes.

pub mod config;
pub mod registry;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] config::ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}
