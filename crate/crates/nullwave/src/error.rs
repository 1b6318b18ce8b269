use std::path::PathBuf;

use nullwave_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// A structural check reported that the condition fails.
    pub const CHECK_FAILED: i32 = 1;
    /// Blowup detected; outputs were written.
    pub const BLOWUP: i32 = 2;
    pub const INVALID_CONFIG: i32 = 3;
    /// Per-step fixed point or another numerical stage failed.
    pub const DIVERGENCE: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// `field` is the dotted path of the offending entry.
    #[error("{field} {message}")]
    Config { field: String, message: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Read { .. } | CliError::Write { .. } => exit::INVALID_CONFIG,
            CliError::Numerical(_) => exit::DIVERGENCE,
        }
    }

    pub fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config { field, message } => CliError::Config { field, message },
            CoreError::Domain(m) => CliError::config("input", m),
            CoreError::Geometry(m) => CliError::config("obstacle", m),
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
