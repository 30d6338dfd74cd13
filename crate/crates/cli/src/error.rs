use std::path::PathBuf;

use qrcp_core::QrError;
use thiserror::Error;

use crate::mtx::MtxError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Mtx {
        path: PathBuf,
        #[source]
        source: MtxError,
    },
    #[error("{path}: {msg}")]
    Csv { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] QrError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for usage errors, 3 for everything else.
    /// (Status 1 is reserved for a structure check that ran and failed.)
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(QrError::UnsupportedInjection) => 2,
            _ => 3,
        }
    }
}
