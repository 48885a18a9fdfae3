use std::path::PathBuf;

use thiserror::Error;

/// Runner failure, grouped by what the user has to change.
#[derive(Debug, Error)]
pub enum RunError {
    /// Malformed or inconsistent configuration.
    #[error("config error: {0}")]
    Schema(String),
    /// The requested size exceeds a memory or runtime cutoff.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A numerical routine failed (non-convergence, bad fit, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl RunError {
    /// Process exit code: 2 schema, 3 resource, 4 numerical, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Resource(_) => 3,
            RunError::Numerical(_) => 4,
            RunError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        RunError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

impl From<scramble::Error> for RunError {
    fn from(e: scramble::Error) -> Self {
        use scramble::Error as E;
        match e {
            E::DimensionLimit { .. } => RunError::Resource(e.to_string()),
            E::SiteOutOfRange { .. }
            | E::InvalidRegion(_)
            | E::InvalidSpec(_)
            | E::UnsupportedState(_)
            | E::UnknownPauli(_)
            | E::InvalidConfig(_)
            | E::Empty(_) => RunError::Schema(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
