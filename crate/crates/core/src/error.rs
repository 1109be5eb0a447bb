use thiserror::Error;

pub type Result<T> = std::result::Result<T, FgpsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FgpsError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Newton iteration for a Gauss node failed to settle.
    #[error("root iteration did not converge for node {index} (last correction {last_step:e})")]
    RootNotConverged { index: usize, last_step: f64 },

    /// An iterative or adaptive evaluation stopped before reaching the requested accuracy.
    #[error("requested accuracy not reached: best estimate {estimate:e} with error estimate {error:e}")]
    AccuracyNotReached { estimate: f64, error: f64 },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(FgpsError::Domain(msg.into()))
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(FgpsError::LengthMismatch {
            what,
            expected,
            got,
        })
    }
}
