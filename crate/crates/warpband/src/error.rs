use std::path::PathBuf;

/// Errors of the file formats and the command line, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Core(#[from] warpband_core::Error),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// 0 success, 1 IO or numerical failure, 2 bad arguments or input,
    /// 3 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument(_) | CliError::Format { .. } => 2,
            CliError::Core(warpband_core::Error::Numerical(_)) => 1,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Verification(_) => 3,
        }
    }
}
