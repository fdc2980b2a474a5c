use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Variants fall in three families that the CLI maps to distinct exit codes:
/// usage problems, numerical failures, and I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("{0} is singular to working precision")]
    Singular(&'static str),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{what} hit its iteration cap with best gap {best_gap:e}")]
    IterationCap { what: &'static str, best_gap: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that signal numerical trouble rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::Singular(_)
                | Error::IterationCap { .. }
                | Error::NotSymmetric { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
