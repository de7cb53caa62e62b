use std::path::{Path, PathBuf};

use latticefringe::Error as CoreError;

/// Failure classes and their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::InvalidGrid(_) | CoreError::Undersampled(_) => {
                CliError::Config(e.to_string())
            }
            CoreError::Degenerate(_) | CoreError::WindowClipped(_) | CoreError::TooManyFailures { .. } => {
                CliError::Numeric(e.to_string())
            }
            // files are read and written by the caller; these only see in-memory data
            CoreError::Csv(_) | CoreError::Json(_) | CoreError::Io(_) => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
