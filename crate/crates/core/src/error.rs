use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("model has no rules")]
    EmptyModel,

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("stream exhausted after {samples} samples (stamp {stamp} of {stamps})")]
    StreamExhausted {
        stamp: usize,
        stamps: usize,
        samples: usize,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the input data rather than the configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NonFinite
                | Error::Parse { .. }
                | Error::StreamExhausted { .. }
                | Error::InsufficientData(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
