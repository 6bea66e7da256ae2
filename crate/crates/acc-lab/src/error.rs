use std::path::PathBuf;

/// Errors produced by the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid geometric or combinatorial input (cell sizes, patterns, mesh
    /// parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A file could not be read or written.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A text file (pattern, snapshot, config) failed to parse.
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// Internal geometry inconsistency (bond trace gaps, nonconforming
    /// intersections); indicates a mesh construction bug.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A linear solve failed (singular matrix, CG breakdown).
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// An eigenvalue computation failed to converge.
    #[error("eigensolve failed: {0}")]
    Eigensolve(String),

    /// The nonlinear solver failed (line-search breakdown, bond collapse,
    /// iteration budget).
    #[error("solver failed: {0}")]
    Solver(String),

    /// A continuation run failed to bracket or refine the critical parameter.
    #[error("continuation failed: {0}")]
    Continuation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}
