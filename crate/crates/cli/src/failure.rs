use std::process::ExitCode;

use singell_core::Error;

/// Why a command stopped, and the process exit code that goes with it.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and did not hold.
    Check(String),
    Solver(String),
    Usage(String),
    Missing(String),
    /// Writing outputs failed, or a core invariant broke.
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Usage(_) => 64,
            Failure::Missing(_) => 66,
            Failure::Internal(_) => 70,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Solver(m) | Failure::Usage(m) | Failure::Missing(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Usage(_) | Error::Resource(_) => Failure::Usage(e.to_string()),
            Error::Parse(_) => Failure::Usage(e.to_string()),
            Error::Convergence { .. } => Failure::Solver(e.to_string()),
            Error::Internal(_) | Error::Io(_) => Failure::Internal(e.to_string()),
        }
    }
}
