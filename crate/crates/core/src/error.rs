//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (word syntax, partition syntax, ...).
    #[error("parse error: {0}")]
    Parse(String),
    /// Structurally valid input that violates a precondition.
    #[error("input error: {0}")]
    Input(String),
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured size guard was exceeded.
    #[error("resource guard exceeded: {what} (bound {bound})")]
    Resource { what: String, bound: u64 },
    /// Group not supported by the exact-arithmetic backends.
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    /// An internal invariant failed; indicates a bug.
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn resource(what: impl Into<String>, bound: u64) -> Self {
        Error::Resource { what: what.into(), bound }
    }

    /// Exit code per the CLI contract: 2 input, 3 resource, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Input(_) | Error::Domain(_) | Error::UnsupportedGroup(_) => 2,
            Error::Resource { .. } => 3,
            Error::Internal(_) => 4,
        }
    }
}
