use compound_feedback::Error;
use thiserror::Error as ThisError;

/// Failures of a command, each with a stable exit code.
#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("runaway session at n = {n}, channel {ell}: no ACCEPT within {max_epochs} epochs")]
    Runaway { n: usize, ell: usize, max_epochs: usize },

    #[error("{0}")]
    Capability(String),

    #[error("oracle check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Library(Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 other failure, 2 config error, 3 runaway, 4 capability.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runaway { .. } => 3,
            CliError::Capability(_) => 4,
            CliError::CheckFailed(_) | CliError::Library(_) | CliError::Io { .. } => 1,
        }
    }

    /// Attaches the simulation cell to a runaway error.
    pub(crate) fn in_cell(e: Error, n: usize, ell: usize) -> Self {
        match e {
            Error::Runaway { max_epochs } => CliError::Runaway { n, ell, max_epochs },
            other => other.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidChannel { .. }
            | Error::InfeasibleRate { .. }
            | Error::DegenerateChannel { .. } => CliError::Config(e.to_string()),
            Error::Capability(_) => CliError::Capability(e.to_string()),
            Error::Runaway { max_epochs } => CliError::Runaway { n: 0, ell: 0, max_epochs },
            Error::NonConvergence { .. } => CliError::Library(e),
        }
    }
}
