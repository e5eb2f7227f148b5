//! Error type shared across the library.
//!
//! Numerical routines return `CapError` instead of panicking so the CLI can
//! map failures to exit codes and name the offending computation.

/// Convenience alias used throughout the crate.
pub type CapResult<T> = Result<T, CapError>;

/// Failure modes of the capacity-region computations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum CapError {
    /// A pulse, channel, or request parameter is out of range.
    #[error("invalid {field}: {reason}")]
    InvalidSpec { field: String, reason: String },

    /// A matrix that must be inverted has an eigenvalue at or below the
    /// configured floor and flooring was not permitted.
    #[error("degenerate matrix in {context}: eigenvalue {eigenvalue:.3e} below floor {floor:.3e}")]
    DegenerateMatrix {
        context: &'static str,
        eigenvalue: f64,
        floor: f64,
    },

    /// An input covariance has a significantly negative eigenvalue.
    #[error("covariance in {context} is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd {
        context: &'static str,
        min_eigenvalue: f64,
    },

    /// A mode or spectral allocation exceeds its user's power budget.
    #[error("power budget exceeded for user {user}: allocated {allocated:.9e} > budget {budget:.9e}")]
    BudgetExceeded {
        user: usize,
        allocated: f64,
        budget: f64,
    },

    /// A spectral allocation puts power where the folded spectrum vanishes.
    #[error("spectrum is positive on a dead band at lambda = {lambda:.6}: folded spectrum {folded:.3e}")]
    SpectrumOnDeadBand { lambda: f64, folded: f64 },

    /// A special-case routine was called outside its domain of validity.
    #[error("precondition violated in {context}: {reason}")]
    PreconditionViolated { context: &'static str, reason: String },

    /// The concave ascent hit its iteration cap before the convergence
    /// window was satisfied. Carries the final iterate's summary so the
    /// failure is never silent.
    #[error("optimizer stalled after {iterations} iterations: objective {objective:.12e}, last window gain {window_gain:.3e}")]
    OptimizerStalled {
        iterations: usize,
        objective: f64,
        window_gain: f64,
    },

    /// An I/O failure while writing CSV/SVG artifacts.
    #[error("output failure on {path}: {reason}")]
    OutputFailure { path: String, reason: String },

    /// A scenario configuration file failed to parse or validate.
    #[error("config error at {field}: {reason}")]
    ConfigError { field: String, reason: String },
}

impl CapError {
    /// Exit code the CLI maps this error to: 2 for configuration problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CapError::InvalidSpec { .. } | CapError::ConfigError { .. } => 2,
            _ => 3,
        }
    }

    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        CapError::InvalidSpec {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
