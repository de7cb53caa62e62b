use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid undersampled: {0}")]
    Undersampled(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("analysis window clipped by grid: {0}")]
    WindowClipped(String),

    #[error("ensemble failed: {failed} of {trials} fits failed (limit 5%)")]
    TooManyFailures { failed: usize, trials: usize },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
