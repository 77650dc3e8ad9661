//! Named test functions and the reference configurations swept by the
//! verification suites.

use crate::cdf::DensityModel;
use crate::error::{Error, Result};
use crate::expr::parse;
use crate::kernel::TauParams;
use crate::quad::{Fn1D, QuadConfig};
use crate::scalar::Scalar;
use crate::weights::{builtin_weight, Weight, WeightSpec};

/// Names accepted by [`registry_function`].
pub const FUNCTION_NAMES: [&str; 7] = ["linear", "quadratic", "cubic", "quartic", "sine", "exponential", "kink"];

/// The smooth functions of the default corpus (every name except `kink`).
pub const CORPUS_FUNCTIONS: [&str; 6] = ["linear", "quadratic", "cubic", "quartic", "sine", "exponential"];

/// Weights of the default corpus, all on `[0, 1]`.
pub const CORPUS_WEIGHTS: [&str; 5] = ["uniform", "increasing", "decreasing", "exponential", "arcsine"];

pub const FULL_X: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const FULL_COEFFICIENTS: [(f64, f64); 5] = [(1.0, 1.0), (2.0, 1.0), (1.0, 0.0), (0.0, 1.0), (3.0, 5.0)];
pub const SMALL_X: [f64; 3] = [0.1, 0.5, 0.9];
pub const SMALL_COEFFICIENTS: [(f64, f64); 2] = [(1.0, 1.0), (3.0, 5.0)];
pub const EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

/// A built-in function with closed derivative and antiderivative.
pub fn registry_function<T: Scalar>(name: &str) -> Option<Fn1D<T>> {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let f = match name {
        "linear" => Fn1D::new("2*t - 1", move |t: T| two * t - T::one())
            .with_derivative(move |_| two)
            .with_antiderivative(|t: T| t * t - t),
        "quadratic" => Fn1D::new("t^2", |t: T| t * t)
            .with_derivative(move |t: T| two * t)
            .with_antiderivative(move |t: T| t.powi(3) / three),
        "cubic" => Fn1D::new("t^3 - 2*t", move |t: T| t.powi(3) - two * t)
            .with_derivative(move |t: T| three * t * t - two)
            .with_antiderivative(|t: T| t.powi(4) / T::lit(4.0) - t * t),
        "quartic" => Fn1D::new("t^4", |t: T| t.powi(4))
            .with_derivative(|t: T| T::lit(4.0) * t.powi(3))
            .with_antiderivative(|t: T| t.powi(5) / T::lit(5.0)),
        "sine" => Fn1D::new("sin(3*t)", move |t: T| (three * t).sin())
            .with_derivative(move |t: T| three * (three * t).cos())
            .with_antiderivative(move |t: T| -(three * t).cos() / three),
        "exponential" => Fn1D::new("exp(t)", |t: T| t.exp())
            .with_derivative(|t: T| t.exp())
            .with_antiderivative(|t: T| t.exp()),
        "kink" => {
            let half = T::lit(0.5);
            Fn1D::new("abs(t - 0.5)", move |t: T| (t - half).abs())
                .with_derivative(move |t: T| if t < half { -T::one() } else { T::one() })
                .with_antiderivative(move |t: T| (t - half) * (t - half).abs() / two)
                .with_breakpoints(vec![half])
        }
        _ => return None,
    };
    Some(f)
}

/// A registry name, or else an expression in `t`.
pub fn resolve_function<T: Scalar>(source: &str) -> Result<Fn1D<T>> {
    let source = source.trim();
    if let Some(f) = registry_function(source) {
        return Ok(f);
    }
    Ok(parse(source)?.to_fn1d())
}

/// One point of a sweep: a function, a weight and the evaluation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case<T> {
    pub function: usize,
    pub weight: usize,
    pub params: TauParams<T>,
}

/// Functions x weights x points x coefficient pairs, all on one interval.
#[derive(Debug, Clone)]
pub struct Corpus<T: Scalar> {
    pub functions: Vec<Fn1D<T>>,
    pub weights: Vec<Weight<T>>,
    pub xs: Vec<T>,
    pub coefficients: Vec<(T, T)>,
}

impl<T: Scalar> Corpus<T> {
    fn build(weights: &[&str], xs: &[f64], coefficients: &[(f64, f64)]) -> Result<Self> {
        let (a, b) = (T::zero(), T::one());
        let functions = CORPUS_FUNCTIONS
            .iter()
            .map(|n| registry_function(n).ok_or_else(|| Error::UnknownFunction(n.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let weights = weights
            .iter()
            .map(|n| builtin_weight(&WeightSpec::named(*n), a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            functions,
            weights,
            xs: xs.iter().map(|&x| T::lit(x)).collect(),
            coefficients: coefficients.iter().map(|&(p, q)| (T::lit(p), T::lit(q))).collect(),
        })
    }

    /// Nine points and five coefficient pairs.
    pub fn full() -> Result<Self> {
        Self::build(&CORPUS_WEIGHTS, &FULL_X, &FULL_COEFFICIENTS)
    }

    /// Three points and two coefficient pairs: 180 cases.
    pub fn small() -> Result<Self> {
        Self::build(&CORPUS_WEIGHTS, &SMALL_X, &SMALL_COEFFICIENTS)
    }

    /// Keeps only the named weights.
    pub fn restrict_weights(mut self, names: &[&str]) -> Self {
        self.weights.retain(|w| names.contains(&w.name()));
        self
    }

    /// Cases in function, weight, point, coefficient order.
    pub fn cases(&self) -> Result<Vec<Case<T>>> {
        let mut out = Vec::with_capacity(self.len());
        for function in 0..self.functions.len() {
            for (weight, w) in self.weights.iter().enumerate() {
                let (a, b) = w.domain();
                for &x in &self.xs {
                    for &(alpha, beta) in &self.coefficients {
                        out.push(Case {
                            function,
                            weight,
                            params: TauParams::new(a, b, x, alpha, beta)?,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.functions.len() * self.weights.len() * self.xs.len() * self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Densities of the distribution-function corpus, before normalisation.
pub const CORPUS_DENSITIES: [&str; 4] = ["uniform", "linear", "quadratic", "bell"];
/// Weights paired with every density.
pub const DENSITY_WEIGHTS: [&str; 3] = ["uniform", "increasing", "exponential"];

/// Unnormalised density on `[0, 1]` by name.
pub fn corpus_density<T: Scalar>(name: &str) -> Option<Fn1D<T>> {
    let f = match name {
        "uniform" => Fn1D::constant(T::one()),
        "linear" => Fn1D::new("2*t", |t: T| T::lit(2.0) * t).with_derivative(|_| T::lit(2.0)),
        "quadratic" => Fn1D::new("3*t^2", |t: T| T::lit(3.0) * t * t).with_derivative(|t: T| T::lit(6.0) * t),
        "bell" => {
            let (mu, s2) = (T::lit(0.5), T::lit(2.0 * 0.2 * 0.2));
            Fn1D::new("exp(-(t - 0.5)^2 / 0.08)", move |t: T| (-(t - mu).powi(2) / s2).exp())
                .with_derivative(move |t: T| -T::lit(2.0) * (t - mu) / s2 * (-(t - mu).powi(2) / s2).exp())
        }
        _ => return None,
    };
    Some(f)
}

/// Every corpus density paired with every corpus weight, renormalised.
pub fn density_corpus<T: Scalar>(cfg: &QuadConfig<T>) -> Result<Vec<DensityModel<T>>> {
    let mut out = Vec::new();
    for d in CORPUS_DENSITIES {
        for w in DENSITY_WEIGHTS {
            let density = corpus_density(d).ok_or_else(|| Error::UnknownFunction(d.to_string()))?;
            let weight = builtin_weight(&WeightSpec::named(w), T::zero(), T::one())?;
            out.push(DensityModel::normalized(density, weight, cfg)?);
        }
    }
    Ok(out)
}
