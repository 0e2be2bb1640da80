use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 is reserved for any run that produced a verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<spinorbit::Error> for CliError {
    fn from(e: spinorbit::Error) -> Self {
        match e {
            spinorbit::Error::SolverFailure { .. } => CliError::Solver(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
