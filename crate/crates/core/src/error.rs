use thiserror::Error;

/// Errors surfaced by the library.
///
/// Certificate violations carry the step at which a runtime inequality
/// failed; they indicate a bug rather than a tolerance problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("enumeration cap exceeded: {needed} profiles > cap {cap}")]
    EnumerationCap { needed: u128, cap: u64 },
    #[error("non-finite value at {0}")]
    NonFinite(String),
    #[error("certificate violated at step {step}: {what} (slack {slack:e})")]
    Certificate { step: usize, what: String, slack: f64 },
    #[error("step {step} failed: {source}")]
    Step { step: usize, source: Box<Error> },
    #[error("run diverged at step {0}")]
    Diverged(usize),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
