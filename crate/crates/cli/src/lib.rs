//! Command-line front end: configuration, built-in examples and the four
//! experiment commands.

pub mod build;
pub mod commands;
pub mod config;
pub mod output;
pub mod registry;

use std::path::PathBuf;

pub use commands::{check_lie, check_patchwork, run, simulate, synthesize, Command, Outcome};
pub use config::{ConfigError, ExperimentConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] sdstab::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use sdstab::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(E::Parse { .. } | E::InvalidArgument(_) | E::PreconditionViolation(_)) => EXIT_CONFIG,
            CliError::Core(E::OffsetSelection { .. } | E::NotStabilizable { .. }) => EXIT_FAIL,
            CliError::Core(_) | CliError::Io { .. } => EXIT_NUMERICAL,
        }
    }
}
