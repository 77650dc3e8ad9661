use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised by the numeric core.
///
/// Values are carried as `f64` regardless of the scalar type the computation
/// ran in, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {t} lies outside the domain [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: f64, b: f64, reason: &'static str },

    #[error(
        "quadrature did not converge on [{c}, {d}]: error estimate {estimate:e} exceeds \
         {tolerance:e} after {subdivisions} subdivisions"
    )]
    NoConvergence {
        c: f64,
        d: f64,
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("non-finite value {value} at t = {t}")]
    NonFinite { t: f64, value: f64 },

    #[error("degenerate weight mass {mass:e} on [{c}, {d}]")]
    DegenerateMass { c: f64, d: f64, mass: f64 },

    #[error("unknown weight `{0}`")]
    UnknownWeight(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid coefficients alpha = {alpha}, beta = {beta}: {reason}")]
    InvalidCoefficients {
        alpha: f64,
        beta: f64,
        reason: &'static str,
    },

    #[error("weight is negative ({value}) at t = {t}")]
    NegativeWeight { t: f64, value: f64 },

    #[error("density is negative ({value}) at t = {t}")]
    NegativeDensity { t: f64, value: f64 },

    #[error("density has weighted mass {mass}, expected 1")]
    DensityMass { mass: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("report output failed: {0}")]
    Report(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
