use thiserror::Error;

/// Errors raised by configuration, evaluation and the sweep runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("term budget exceeded: {what} needs {terms} terms (budget {budget})")]
    TermBudget {
        what: &'static str,
        terms: u128,
        budget: u128,
    },

    #[error("{evaluator} returned {value}, outside [0, 1]; config: {config}")]
    OutOfRange {
        evaluator: &'static str,
        value: f64,
        config: String,
    },

    #[error("quadrature did not converge for {what} (estimate {estimate}, error {error})")]
    Quadrature {
        what: &'static str,
        estimate: f64,
        error: f64,
    },

    #[error("slice shape mismatch: expected {expected} gains, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("insufficient points for a diversity fit: {got} in window, need at least 3")]
    InsufficientPoints { got: usize },

    #[error("nonpositive SOP value {value} at lambda_se = {lambda}")]
    NonPositiveSop { lambda: f64, value: f64 },

    #[error("trials below minimum: {got} < {min}")]
    TrialsBelowMinimum { got: u64, min: u64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
