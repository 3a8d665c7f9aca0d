use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or run parameter is out of its admissible range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with inputs violating its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// CFL breach, NaN/Inf state, or a non-finite model evaluation.
    #[error("numerical failure{}{}: {message}", fmt_path(*path), fmt_step(*step))]
    Numerical {
        message: String,
        path: Option<u64>,
        step: Option<usize>,
    },
}

fn fmt_path(path: Option<u64>) -> String {
    path.map(|p| format!(" (path {p})")).unwrap_or_default()
}

fn fmt_step(step: Option<usize>) -> String {
    step.map(|s| format!(" at step {s}")).unwrap_or_default()
}

impl Error {
    pub fn numerical(message: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            path: None,
            step: None,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::Numerical { message, path, .. } => Error::Numerical {
                message,
                path,
                step: Some(step),
            },
            other => other,
        }
    }

    /// Tags a numerical failure with the Monte Carlo path that produced it.
    pub fn on_path(self, path_index: u64) -> Self {
        match self {
            Error::Numerical { message, step, .. } => Error::Numerical {
                message,
                path: Some(path_index),
                step,
            },
            other => other,
        }
    }
}
