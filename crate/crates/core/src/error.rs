use std::path::PathBuf;

use crate::uc::SolverError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: schema error at line {line}, column {column}: {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid case: generator `{generator}`, field `{field}`: {message}")]
    InvalidGenerator {
        generator: String,
        field: &'static str,
        message: String,
    },

    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model build error: {0}")]
    Build(String),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("import error: {0}")]
    Import(String),

    #[error("simulation aborted at iteration {iteration}: {source}")]
    Aborted {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("chart rendering: {0}")]
    Chart(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, looking through [`Error::Aborted`].
    pub fn root(&self) -> &Error {
        match self {
            Error::Aborted { source, .. } => source.root(),
            other => other,
        }
    }
}
