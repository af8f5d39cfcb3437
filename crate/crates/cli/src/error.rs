use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration, parameters or arguments.
pub const EXIT_VALIDATION: i32 = 1;
/// A solver stopped at its step limit before converging.
pub const EXIT_NOT_CONVERGED: i32 = 2;
/// Reading or writing a file failed.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Core(#[from] gvf_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => EXIT_IO,
            CliError::Config { .. } | CliError::Core(_) | CliError::Usage(_) => EXIT_VALIDATION,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), message: message.into() }
    }
}

/// Problems with the content of an image or field file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("unsupported magic {0:?} (expected P2 or P5)")]
    UnsupportedMagic(String),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} samples, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("bad magic (expected \"GVF1\")")]
    BadMagic,
    #[error("size mismatch: header declares {expected} bytes of values, payload has {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("invalid field: {0}")]
    InvalidField(String),
}
