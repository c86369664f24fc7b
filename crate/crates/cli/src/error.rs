use thiserror::Error;

/// Failures surfaced by the runner, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pseudobo::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed trace: {0}")]
    Trace(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use pseudobo::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::Config(_) | E::Domain { .. }) => 2,
            Self::Core(E::Numerical(_) | E::Infeasible(_) | E::State(_)) => 3,
            Self::Core(E::Objective(_)) => 4,
            Self::Io { .. } | Self::Trace(_) => 1,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub(crate) fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}
