use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] taxsim_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: io::Error },

    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

impl AppError {
    /// 1 for invalid input or configuration, 2 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::File { .. } | AppError::Output(_) | AppError::Core(taxsim_core::Error::Io(_)) => 2,
            _ => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
