use thiserror::Error;

/// Failure modes shared by all analysis modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("blow-up detected near r = {r:e}")]
    BlowUpDetected { r: f64 },
    #[error("step size underflow near r = {r:e}")]
    StiffnessFailure { r: f64 },
    #[error("inadmissible test function: {0}")]
    InadmissibleTestFunction(String),
    #[error("u_r vanishes near r = {r:e}")]
    DerivativeVanishes { r: f64 },
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("discretization failure: {0}")]
    DiscretizationFailure(String),
    #[error("u_r changes sign near r = {r:e}")]
    MonotonicityViolation { r: f64 },
    #[error("no zero found before s = {horizon:e}")]
    NoZeroFound { horizon: f64 },
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<S: Into<String>>(msg: S) -> LabError {
    LabError::InvalidArgument(msg.into())
}
