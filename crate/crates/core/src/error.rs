//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the domain of the function evaluated on it.
    #[error("domain error in `{arg}`: {reason}")]
    Domain { arg: String, reason: String },

    /// Matrix or vector shape is incompatible (including asymmetric input).
    #[error("shape error: {0}")]
    Shape(String),

    /// A caller-supplied argument is invalid.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The pair (generator, scaler) does not meet the affine / restricted
    /// homogeneity condition at the points supplied.
    #[error("identity precondition violated: {0}")]
    IdentityPrecondition(String),

    /// An iterative numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Model fitting could not proceed.
    #[error("fit error: {0}")]
    Fit(String),

    /// A result was requested outside the parameter regime in which it holds.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(arg: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            arg: arg.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
