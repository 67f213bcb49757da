//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the mathematical domain was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size/magnitude guard was exceeded. The message names the
    /// required magnitude so callers can decide whether to raise the cap.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A block sequence that must be strictly successive was not.
    #[error("malformed block sequence: {0}")]
    MalformedBlocks(String),

    /// Persistent state (coding table, certificate) failed its replay check.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Text-format parse failure.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
