//! Error types shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// What exactly went wrong while decoding a dataset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseKind {
    /// Magic number did not match the expected format marker.
    BadMagic { expected: u32, found: u32 },
    /// File ended before the declared payload.
    Truncated { expected_bytes: u64, found_bytes: u64 },
    /// Image and label files disagree on the sample count.
    CountMismatch { images: usize, labels: usize },
    /// A record field holds an out-of-range value.
    BadValue(String),
}

impl std::fmt::Display for ParseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseKind::BadMagic { expected, found } => {
                write!(f, "bad magic: expected 0x{expected:08x}, found 0x{found:08x}")
            }
            ParseKind::Truncated {
                expected_bytes,
                found_bytes,
            } => write!(
                f,
                "truncated file: expected {expected_bytes} bytes, found {found_bytes}"
            ),
            ParseKind::CountMismatch { images, labels } => {
                write!(f, "count mismatch: {images} images vs {labels} labels")
            }
            ParseKind::BadValue(msg) => write!(f, "bad value: {msg}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {path}: {kind}")]
    Parse { path: PathBuf, kind: ParseKind },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("training diverged: non-finite loss at epoch {epoch}, step {step}")]
    NonFinite { epoch: usize, step: usize },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, kind: ParseKind) -> Self {
        Error::Parse {
            path: path.into(),
            kind,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
