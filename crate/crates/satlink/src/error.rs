use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid interference profile: {0}")]
    InvalidProfile(String),

    #[error("LDPC construction failed: {0}")]
    Construction(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("search did not find a solution: {0}")]
    NotFound(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
