use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a core error, prefixing invalid-input fields with `context`.
    pub(crate) fn core(context: &str, err: tng_core::Error) -> Self {
        if err.is_numeric() {
            return CliError::Numeric(format!("{context}: {err}"));
        }
        match err {
            tng_core::Error::InvalidInput { field, reason } if !context.is_empty() => {
                CliError::Validation(format!("{context}.{field}: {reason}"))
            }
            tng_core::Error::InvalidInput { field, reason } => {
                CliError::Validation(format!("{field}: {reason}"))
            }
            other if context.is_empty() => CliError::Validation(other.to_string()),
            other => CliError::Validation(format!("{context}: {other}")),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
