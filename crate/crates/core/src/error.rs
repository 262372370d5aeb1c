use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` must be finite and strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("parameters must satisfy sigma < delta_x < d (sigma = {sigma}, delta_x = {delta_x}, d = {d})")]
    OrderingViolation { sigma: f64, delta_x: f64, d: f64 },

    #[error("parameter file line {line}: {message}")]
    ParamFile { line: usize, message: String },

    #[error("branch index {0} outside 1..=9")]
    IndexOutOfRange(usize),

    #[error("relative coordinate {x_rel} m puts the masses at non-positive separation")]
    DomainError { x_rel: f64 },

    #[error(
        "trajectory approached the Newtonian singularity at t = {t} s (separation {separation} m)"
    )]
    SingularityApproached { t: f64, separation: f64 },

    #[error("quadrature spec violation: {0}")]
    SpecViolation(String),

    #[error("{method} is not available for {kind}")]
    MethodUnsupported { method: &'static str, kind: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
