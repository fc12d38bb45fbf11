use thiserror::Error;

/// Errors raised by model construction, dynamics and analysis.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CompassError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("at most 2 nuclei are supported, got {0}")]
    TooManyNuclei(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("evolution did not converge: residual population {residual:.3e} at t_max = {t_max:.3e} s")]
    NonConvergence { residual: f64, t_max: f64 },

    #[error("positivity violated at t = {time:.3e} s: minimum eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },

    #[error("singular linear system ({0}); is the decay rate zero?")]
    SingularSystem(String),

    #[error("the direct yield path requires a static field (b_rf = 0)")]
    TimeDependentField,

    #[error("channel `{0}` mixes spin and shelf blocks in an unsupported way")]
    UnsupportedChannel(String),

    #[error("empty sweep")]
    EmptySweep,

    #[error("angle grids differ between the paired sweeps")]
    GridMismatch,

    #[error("trajectory too short: tail bound {tail_bound:.3e} exceeds tolerance {tolerance:.3e}")]
    TrajectoryTooShort { tail_bound: f64, tolerance: f64 },

    #[error("unknown figure `{0}`")]
    UnknownFigure(String),
}

pub type Result<T> = std::result::Result<T, CompassError>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> CompassError {
    CompassError::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
