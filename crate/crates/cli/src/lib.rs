//! Command-line driver for GCAE: flat `key = value` configs in, CSV
//! artifacts and JSON reports out.

pub mod commands;
pub mod config;
pub mod report;

use gcae::GcaeError;
use thiserror::Error;

/// Failure of a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Numerical(_) => "numerical",
        }
    }

    /// `error: <category>: <message>` on one line.
    pub fn line(&self) -> String {
        let message = self.to_string().replace(['\n', '\r'], " ");
        format!("error: {}: {message}", self.category())
    }
}

impl From<GcaeError> for CliError {
    fn from(e: GcaeError) -> Self {
        let message = e.to_string();
        if e.is_io() {
            CliError::Io(message)
        } else if e.is_numerical() {
            CliError::Numerical(message)
        } else {
            CliError::Validation(message)
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
