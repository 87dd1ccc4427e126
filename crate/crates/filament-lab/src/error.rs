//! Crate-wide error type.

/// Errors reported by the numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter failed its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The adaptive integrator could not take a step without the step size
    /// underflowing (stiffness or a singular right-hand side); `at` is the last
    /// abscissa that was reached with a valid state.
    #[error("step size underflow at x = {at}")]
    StepSizeUnderflow { at: f64 },

    /// The adaptive integrator exceeded its step budget.
    #[error("step budget exhausted at x = {at} after {steps} steps")]
    MaxStepsExceeded { at: f64, steps: usize },

    /// A conservation-law residual came out larger than the integration
    /// tolerance can explain; the solution is not trusted.
    #[error("conserved quantity drifted by {residual:.3e} (allowed {allowed:.3e})")]
    ConservationViolation { residual: f64, allowed: f64 },

    /// A least-squares fit did not reach the requested quality even after the
    /// window was widened.
    #[error("fit residual {residual:.3e} exceeds threshold {threshold:.3e} ({context})")]
    FitFailed {
        residual: f64,
        threshold: f64,
        context: String,
    },

    /// A bracketing root-finder was called on an interval without a sign change.
    #[error("no sign change of {context} on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64, context: String },

    /// An evaluation point fell outside the range covered by sampled data.
    #[error("requested point {requested} outside covered range [{lo}, {hi}]")]
    OutOfRange { requested: f64, lo: f64, hi: f64 },

    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A fixed-point iteration failed to contract.
    #[error("iteration diverged: {0}")]
    Diverged(String),

    /// A time integration left its validity envelope (spectral tail, boundary
    /// mass, or amplitude growth); the message carries the diagnostics.
    #[error("evolution aborted at t = {t:.6e}: {detail}")]
    Unstable { t: f64, detail: String },

    /// Configuration file / schema problems (CLI layer).
    #[error("configuration error: {0}")]
    Config(String),

    /// Filesystem errors while writing run artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization errors for run artifacts.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
