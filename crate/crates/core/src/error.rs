use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor rejected a parameter value.
    #[error("invalid parameter `{field}` = {value}: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Ranked default times were passed out of order.
    #[error("ordering error: expected theta1 <= theta2, got {theta1} > {theta2}")]
    Ordering { theta1: f64, theta2: f64 },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// An accepted iterate needed an exponent above the overflow guard.
    #[error("exponent {exponent} exceeds the overflow guard in {context}")]
    ExponentOverflow { exponent: f64, context: &'static str },

    /// A level-two value was requested where the ordered density vanishes.
    #[error("zero default density at theta = ({theta1}, {theta2})")]
    ZeroDensity { theta1: f64, theta2: f64 },

    #[error("{failed} of {paths} simulated paths overflowed the utility (limit {limit})")]
    SimulationFailures {
        failed: usize,
        paths: usize,
        limit: usize,
    },
}
