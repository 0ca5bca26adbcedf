use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("selection has no active antennas")]
    EmptySelection,

    #[error("subarray has zero diversity; CRLB is unbounded")]
    ZeroDiversity,

    #[error("direction {0} is outside the open interval (-1, 1)")]
    DirectionOutOfRange(f64),

    #[error("candidate set of {count} exceeds the exhaustive-search cap {cap}")]
    BudgetExceeded { count: usize, cap: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("model error: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
