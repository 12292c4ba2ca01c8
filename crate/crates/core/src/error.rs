use thiserror::Error;

/// Errors produced by the simulation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is rank deficient: pivot {index} has magnitude {magnitude:e}")]
    RankDeficient { index: usize, magnitude: f64 },

    #[error("channel draw stayed rank deficient after {0} attempts")]
    DegenerateChannel(usize),

    #[error("unsupported constellation order {0}")]
    UnsupportedOrder(usize),

    #[error("bit block has length {got}, expected {expected}")]
    BlockLength { got: usize, expected: usize },

    #[error("value {0} is not a bipolar bit (expected -1 or +1)")]
    NotBipolar(i8),

    #[error("symbol index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("sequence has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("LLR input contains a non-finite value at position {0}")]
    NonFiniteLlr(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
