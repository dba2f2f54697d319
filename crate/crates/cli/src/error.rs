use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("write failed: {0}")]
    Output(String),
    #[error("{0}")]
    Core(#[from] levelset_decay::Error),
    #[error("{failed} of {total} sweep entries failed")]
    SweepFailures { failed: usize, total: usize },
}

impl CliError {
    /// 2 for anything the caller can fix by editing the invocation,
    /// 1 for failures of the computation itself.
    pub fn exit_code(&self) -> u8 {
        use levelset_decay::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Core(E::Parameter(_)) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
