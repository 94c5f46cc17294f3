use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// The operation would have to represent zero, or an input lies outside the domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The predicted work exceeds a configured cap.
    #[error("budget exceeded: {what} needs {needed}, cap is {cap}")]
    Budget {
        what: String,
        needed: u128,
        cap: u128,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// A theorem's hypotheses do not hold for the given instance.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Internal consistency check failed. Always a bug, never bad input.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::Budget {
            what: what.into(),
            needed,
            cap,
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}
