//! Error taxonomy shared by every module in the crate.
//!
//! The split mirrors how callers want to react:
//!
//! * [`Error::InvalidInput`] — the call itself was malformed (shape mismatch,
//!   empty input, unknown option). Fix the call site.
//! * [`Error::Degenerate`] — the data admits no meaningful answer (a constant
//!   variable, zero kernel bandwidth). Fix or drop the dataset.
//! * [`Error::Numeric`] — a numeric routine gave up (factorization failure,
//!   non-finite intermediate). Usually a regularization problem.
//! * [`Error::Parse`] / [`Error::Io`] — file-level problems, always annotated
//!   with the path (and line, where one exists).
//! * [`Error::Direction`] — wraps a scoring failure with the direction
//!   (`x->y` / `y->x`) it occurred in; use [`Error::root`] to inspect the
//!   underlying cause.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid arguments: shape mismatch, empty input, bad option.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data is degenerate for the requested operation (e.g. a constant
    /// variable makes every bandwidth heuristic and slope estimate collapse).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A numeric routine failed: factorization, eigen solve, non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The method name is recognized but deliberately not implemented here.
    #[error("unsupported method `{0}`; externally computed decisions can be merged with --import-decisions")]
    Unsupported(String),

    /// Parse failure in a data or results file, located by file and 1-based line.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Underlying I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A directional scoring failure inside pair orchestration.
    #[error("scoring {direction}: {source}")]
    Direction {
        direction: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Adapter for `map_err` on I/O results: `.map_err(Error::io(path))`.
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Wrap an error with the direction label it occurred in.
    pub fn in_direction(direction: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Direction {
            direction,
            source: Box::new(source),
        }
    }

    /// Strip any direction annotation and return the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Direction { source, .. } => source.root(),
            other => other,
        }
    }
}
