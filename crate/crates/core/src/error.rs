use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (available: 1..={len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value at {at}: {what}")]
    NonFinite { at: String, what: String },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn non_finite(at: impl std::fmt::Display, what: impl Into<String>) -> Self {
        Error::NonFinite {
            at: at.to_string(),
            what: what.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
