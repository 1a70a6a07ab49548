use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incomparable lengths: {left} vs {right}")]
    IncomparableLengths { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration space of {required} candidates exceeds limit {limit}; raise the limit to at least {required}")]
    SpaceTooLarge { required: u128, limit: u128 },

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported maxval {0}")]
    UnsupportedMaxval(u32),

    #[error("unsupported PGM variant {0:?}, only binary P5 is read")]
    UnsupportedFormat(String),

    #[error("truncated PGM payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("image is not monochrome: pixel value {0} at index {1}")]
    NotMonochrome(u8, usize),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("invalid experiment: {0}")]
    Experiment(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
