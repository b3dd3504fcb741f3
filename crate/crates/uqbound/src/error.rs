use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible distributions: {0}")]
    Incompatible(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("model evaluation failed at (z1={z1}, z2={z2}): {message}")]
    Model { z1: f64, z2: f64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::Incompatible(_)
            | Error::Unsupported(_) => 2,
            Error::Numerical(_) | Error::Model { .. } => 3,
        }
    }
}
