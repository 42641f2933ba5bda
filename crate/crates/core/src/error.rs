use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Iteration state of the eigensolver at the point it gave up.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDiagnostics {
    pub eigen_index: usize,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
}

impl fmt::Display for ConvergenceDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eigenpair {} (lambda = {:e}) after {} iterations: residual {:e} > tolerance {:e}",
            self.eigen_index, self.eigenvalue, self.iterations, self.residual, self.tolerance
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge: {0}")]
    NumericFailure(ConvergenceDiagnostics),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("invariant violated: {name}: {detail}")]
    InvariantViolation { name: String, detail: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            name: name.into(),
            detail: detail.into(),
        }
    }

    /// Wraps the error with a description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
