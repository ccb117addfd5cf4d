use std::io;
use std::path::PathBuf;

/// Errors of the file formats and drivers.
#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] lp_core::Error),
    #[error("checkpoint was written for a different configuration (expected {expected}, found {found})")]
    FingerprintMismatch { expected: String, found: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl LpError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit status: 2 for bad input or usage, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Usage(_) | Self::FingerprintMismatch { .. } => 2,
            Self::Io { .. } => 2,
            Self::Core(e) => match e {
                lp_core::Error::Invariant(_) => 3,
                _ => 2,
            },
            Self::Invariant(_) => 3,
        }
    }
}

pub type LpResult<T> = Result<T, LpError>;
