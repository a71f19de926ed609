use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("velocity {0} is not strictly subluminal")]
    Superluminal(f64),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },

    #[error("proper time must be non-negative, got {0}")]
    NegativeProperTime(f64),

    #[error("worldline needs at least one segment")]
    EmptyWorldline,

    #[error("event ({to_x}, {to_t}) is outside the future light cone of ({from_x}, {from_t})")]
    NotReachable {
        from_x: f64,
        from_t: f64,
        to_x: f64,
        to_t: f64,
    },

    #[error("stroboscopic evolution needs a step count divisible by 8, got {0}")]
    NotStroboscopic(usize),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("sampling grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid slit geometry: {0}")]
    Geometry(String),

    #[error("light cone of {steps} steps from a support of {support} sites wraps a {sites}-site periodic lattice")]
    Wraparound {
        steps: usize,
        support: usize,
        sites: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NotFinite { name, value });
    }
    if value <= 0.0 {
        return Err(Error::NonPositive { name, value });
    }
    Ok(value)
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NotFinite { name, value })
    }
}
