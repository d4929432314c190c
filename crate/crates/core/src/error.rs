use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the re-identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incompatible signatures: fingerprint {left} vs {right}")]
    IncompatibleSignatures { left: String, right: String },

    #[error("evaluation error for probe {probe}: {message}")]
    Evaluation { probe: String, message: String },

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("signature file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("signature file mixes parameter fingerprints ({first} and {other})")]
    MixedFingerprints { first: String, other: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn decode(offset: usize, message: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
