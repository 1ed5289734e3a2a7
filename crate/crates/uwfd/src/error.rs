use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{origin}: line {line}: {message}")]
    Parse { origin: String, line: usize, message: String },
    #[error("{origin}: {message}")]
    Config { origin: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("simulation: {0}")]
    Sim(#[from] uwfd_core::Error),
    #[error("plot {}: {message}", path.display())]
    Plot { path: PathBuf, message: String },
}

impl AppError {
    pub fn config(origin: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Config { origin: origin.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Parse { .. } | AppError::Config { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
