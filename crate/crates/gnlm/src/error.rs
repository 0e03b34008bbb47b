use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Rasters or regions with incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input is degenerate for the requested computation (constant region,
    /// single-bin quantization, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed raster file or sidecar.
    #[error("raster format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format { path: path.into(), reason: reason.into() }
    }

    /// Process exit code used by the CLI: 1 for configuration/usage problems,
    /// 2 for data problems, 3 for numeric ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Dimension(_) | Error::Format { .. } | Error::Io { .. } => 2,
            Error::Domain(_) | Error::Degenerate(_) => 3,
        }
    }
}
