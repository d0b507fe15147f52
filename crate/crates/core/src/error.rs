//! Error type shared by the solvers.

use std::fmt;

/// Failure modes of the solvers and the analysis helpers.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// A constructor or operation received out-of-range input.
    InvalidInput(String),
    /// An explicit time step produced a height below the negative-height
    /// tolerance; the run is aborted at `time`.
    Instability { time: f64, detail: String },
    /// An iterative procedure (shooting bracket, zero-crossing search)
    /// failed to converge.
    Convergence(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            SolverError::Instability { time, detail } => {
                write!(f, "numerical instability at t = {time}: {detail}")
            }
            SolverError::Convergence(msg) => write!(f, "convergence failure: {msg}"),
        }
    }
}

impl std::error::Error for SolverError {}

pub(crate) fn invalid(msg: impl Into<String>) -> SolverError {
    SolverError::InvalidInput(msg.into())
}
