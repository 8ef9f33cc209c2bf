use std::path::PathBuf;

use locc_trace::ErrorKind;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at '{key}': {msg}")]
    Config { key: String, msg: String },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] locc_trace::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), msg: msg.into() }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 ok, 1 configuration or input error, 2 precondition violation,
    /// 3 approximation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Precondition => 2,
                ErrorKind::Approximation => 3,
                ErrorKind::Input | ErrorKind::Internal => 1,
            },
            _ => 1,
        }
    }
}
