use thiserror::Error;

/// Errors produced by the analytic and simulation modules.
///
/// Class indices in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpsError {
    #[error("invalid input: {0}")]
    Usage(String),

    #[error("unstable system: load rho = {rho} must be below {limit}")]
    Unstable { rho: f64, limit: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(
        "fixed-point iteration did not converge in {iterations} iterations \
         (contraction factor q = {q}, last step {last_step:e})"
    )]
    Convergence { iterations: usize, q: f64, last_step: f64 },

    #[error("no completions recorded for class {class}")]
    Statistics { class: usize },
}

pub type Result<T, E = DpsError> = std::result::Result<T, E>;

pub(crate) fn usage(msg: impl Into<String>) -> DpsError {
    DpsError::Usage(msg.into())
}
