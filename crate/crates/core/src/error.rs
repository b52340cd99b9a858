use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unsupported dimension: {0} axes (at most 2)")]
    UnsupportedDimension(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("reference norm is zero")]
    UndefinedReference,

    #[error("checkpoint parse error at line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
