use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped so that front ends can map them onto exit codes:
/// input validation, budget exhaustion and internal consistency failures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("budget exceeded: {what} needs {needed}, cap is {cap}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        cap: u128,
    },

    #[error("matrix is not in GSp: {0}")]
    NotSymplectic(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("empty stratum: {0}")]
    EmptyStratum(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
