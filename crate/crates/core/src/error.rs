use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An internal energy is outside the low-energy regime `|E| < 0.1·mc²`.
    #[error("approximation breach: |E| = {energy} is not below 0.1·mc² = {limit}")]
    ApproximationBreach { energy: f64, limit: f64 },

    #[error("x = {x} lies below the hard floor at {floor}")]
    OutOfDomain { x: f64, floor: f64 },

    #[error("invalid grid: {0}")]
    GridInvalid(String),

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid clock: {0}")]
    InvalidClock(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state left the representable range: {0}")]
    NonFinite(String),

    #[error("potential has no stationary point")]
    NoStationaryPoint,

    #[error("grid or level mismatch: {0}")]
    GridMismatch(String),

    /// Norm drifted beyond 1e-8 during propagation. Indicates a bug.
    #[error("propagation is not unitary: norm drift {drift:e} on level {level}")]
    NonUnitary { level: usize, drift: f64 },

    #[error("state {index} at energy {energy} is not confined (boundary potential {boundary})")]
    NotConfining { index: usize, energy: f64, boundary: f64 },

    #[error("index out of range: {index} for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("potential of level {level} is not constant (spread {spread:e})")]
    NotFree { level: usize, spread: f64 },

    #[error("invalid config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
