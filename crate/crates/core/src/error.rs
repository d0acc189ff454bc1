use thiserror::Error;

/// Errors raised by model construction, ingestion and the numeric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range (bound {bound})")]
    OutOfRange { index: usize, bound: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("value outside the function domain: {0}")]
    Domain(String),

    #[error("search space of {size:.3e} labellings exceeds the enumeration budget {budget}")]
    BudgetExceeded { size: f64, budget: u64 },

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its rendered message.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("io error: {0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(IoError(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
