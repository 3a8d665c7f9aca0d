use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// A certificate or pathwise bound failed.
    #[error("{0}")]
    Bound(String),
    #[error("rate target is infeasible (best residual {residual})")]
    Infeasible { residual: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } | CliError::Bound(_) => 3,
            CliError::Infeasible { .. } => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<sclaw_core::Error> for CliError {
    fn from(e: sclaw_core::Error) -> Self {
        match e {
            sclaw_core::Error::Config(_) | sclaw_core::Error::Precondition(_) => {
                CliError::Config(e.to_string())
            }
            sclaw_core::Error::Numerical { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
