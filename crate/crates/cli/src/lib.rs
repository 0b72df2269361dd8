//! Command implementations behind the `dps` binary.
//!
//! Every command writes its report to a caller-supplied writer and returns an
//! [`Exit`] status; diagnostics travel back as a [`Failure`].

use std::fmt;

use dps_core::DpsError;

pub mod args;
pub mod commands;
pub mod format;
pub mod instance;

/// Process exit statuses. The numeric values are part of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Uncertified = 1,
    Parse = 2,
    Stability = 3,
    TheoremViolation = 4,
    SimMismatch = 5,
    Numeric = 6,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Parse,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<DpsError> for Failure {
    fn from(err: DpsError) -> Self {
        let exit = match err {
            DpsError::Usage(_) => Exit::Parse,
            DpsError::Unstable { .. } => Exit::Stability,
            DpsError::Numeric(_) | DpsError::Convergence { .. } => Exit::Numeric,
            DpsError::Statistics { .. } => Exit::SimMismatch,
        };
        Self {
            exit,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::parse(format!("i/o error: {err}"))
    }
}
