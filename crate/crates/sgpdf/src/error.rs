use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Failures of the command line, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Numeric(#[from] sgpdf_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CliError {
    /// 2 configuration, 3 numerical failure, 4 file IO or malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(sgpdf_core::Error::Config(_)) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } | CliError::Format { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }

    pub fn csv(path: impl Into<PathBuf>, e: csv::Error) -> Self {
        let path = path.into();
        match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io { path, source },
            other => CliError::Format { path, message: format!("{other:?}") },
        }
    }
}
