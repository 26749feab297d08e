use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance too large for {what}: n = {n}, limit {limit}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("log-domain instances are not supported by {0}")]
    LogDomainUnsupported(&'static str),

    #[error("marking strategy failed: {0}")]
    Strategy(String),

    #[error("gave up after {attempts} attempts: {what}")]
    Exhausted { what: &'static str, attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
