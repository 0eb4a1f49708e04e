use thiserror::Error;

/// Errors raised by the numerical layers and by scenario validation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature resolution too low: {what} = {got}, minimum is {min}")]
    Resolution {
        what: &'static str,
        got: usize,
        min: usize,
    },

    #[error("integrand is not finite at node ({x}, {y}, {z})")]
    NonFinite { x: f64, y: f64, z: f64 },

    #[error("kernel near-singular: separation {separation:e} below {limit:e}")]
    NearSingularity { separation: f64, limit: f64 },

    #[error(
        "event (t={t}, x={x}, y={y}, z={z}) lies within the source support \
         (distance {distance} <= {limit})"
    )]
    InsideSupport {
        t: f64,
        x: f64,
        y: f64,
        z: f64,
        distance: f64,
        limit: f64,
    },

    #[error("falloff fit needs at least {needed} samples above the floor, got {usable}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("tensor is not antisymmetric (max |F_mn + F_nm| = {violation:e})")]
    NotAntisymmetric { violation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed or inconsistent scenario; `key` is the dotted path of the offending entry.
    #[error("scenario error at `{key}`: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
