//! Weighted Ostrowski-type inequalities: deviation of a function value from
//! weighted integral means over the two halves of an interval split at `x`,
//! the Peano kernel behind it, and bounds in terms of norms of `f'`.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

// `!(a < b)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes are kept at their published precision.
#![allow(clippy::excessive_precision)]

pub mod bounds;
pub mod cdf;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod functionals;
pub mod kernel;
pub mod norms;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Fn1D = quad::Fn1D<f64>;
pub type QuadConfig = quad::QuadConfig<f64>;
pub type Weight = weights::Weight<f64>;
pub type TauParams = kernel::TauParams<f64>;
pub type WeightedKernel<'w> = kernel::WeightedKernel<'w, f64>;
pub type NormTriple = norms::NormTriple<f64>;
pub type BoundTriple = bounds::BoundTriple<f64>;
pub type BoundSet = bounds::BoundSet<f64>;
pub type DensityModel = cdf::DensityModel<f64>;
pub type Corpus = corpus::Corpus<f64>;
pub type VerifyConfig = verify::VerifyConfig<f64>;

pub use expr::{parse, Expr, ParseError};
pub use weights::WeightSpec;
