use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GcaeError>;

/// Errors raised by the GCAE library.
#[derive(Debug, Error)]
pub enum GcaeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix is numerically singular in {0}; increase the smoothing term")]
    Singular(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
}

impl GcaeError {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        GcaeError::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        GcaeError::InvalidArgument(detail.into())
    }

    /// True for errors caused by bad numbers rather than bad inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, GcaeError::NonFinite(_) | GcaeError::Singular(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, GcaeError::Io { .. } | GcaeError::Parse { .. })
    }
}
