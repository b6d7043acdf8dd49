use crate::fem::SolveLog;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation
    /// (non-finite values, `x = 0`, `p` outside `(1, 2)`, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid request: bad counts, empty sample sets, balls leaving the disk.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("convergence failure: {message}")]
    Convergence {
        message: String,
        log: Box<SolveLog>,
    },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>, log: SolveLog) -> Self {
        Error::Convergence {
            message: msg.into(),
            log: Box::new(log),
        }
    }
}
