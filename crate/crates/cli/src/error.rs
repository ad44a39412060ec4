use thiserror::Error;
use wta_core::analysis::AnalysisError;
use wta_core::integrate::IntegrateError;
use wta_core::optimize::OptimizeError;

/// Failures surfaced by the command line, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed config, unknown names, I/O.
    #[error("{0}")]
    Config(String),
    /// The integrator gave up (positivity failure, non-finite state).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Exhaustive search guard exceeded.
    #[error("{0}")]
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Guard(_) => 3,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("JSON error: {e}"))
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::PositivityFailure { .. } | IntegrateError::NonFinite { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Integrate(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::TooManyCandidates { .. } => CliError::Guard(e.to_string()),
            OptimizeError::Integrate(inner) => inner.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}
