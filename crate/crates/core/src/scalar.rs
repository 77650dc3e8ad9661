//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the numeric core is generic over: `f32` or `f64`.
///
/// The default tolerances scale with the precision of the type, so the same
/// algorithms can run in single precision with correspondingly looser
/// acceptance thresholds.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Default absolute tolerance for adaptive quadrature.
    const DEFAULT_QUAD_TOL: f64;
    /// Relative mass below which a subinterval counts as carrying no weight.
    const MASS_FLOOR: f64;

    /// Converts an `f64` literal into this type.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    const DEFAULT_QUAD_TOL: f64 = 1e-10;
    const MASS_FLOOR: f64 = 1e-13;

    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const DEFAULT_QUAD_TOL: f64 = 1e-5;
    const MASS_FLOOR: f64 = 1e-6;

    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}
