use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("truncation leakage: {0}")]
    Leakage(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("unbounded variance: {0}")]
    UnboundedVariance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Io(_) => 2,
            _ => 3,
        }
    }
}
