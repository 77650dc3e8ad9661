//! Weighted distribution functions and the bounds relating them to a density.
//!
//! With a density `f` and weight `w` on `[a, b]` normalised so that
//! `int f w = 1`, the weighted distribution function is
//! `F_w(x) = int_a^x f w` and the reliability is `R_w = 1 - F_w`.

use serde::Serialize;

use crate::bounds::{exact_factors, paper_factors, BoundTriple};
use crate::error::{Error, Result};
use crate::functionals::tau;
use crate::kernel::{TauParams, WeightedKernel};
use crate::norms::{derivative_norms, norm_inf, norm_one, norm_p, NormTriple};
use crate::quad::{integrate, weighted_integral, Fn1D, QuadConfig};
use crate::scalar::Scalar;
use crate::weights::Weight;

/// Allowed deviation of the weighted total mass from 1.
pub const MASS_TOL: f64 = 1e-8;
const DENSITY_SAMPLES: usize = 257;

/// A density together with the weight it is normalised against.
#[derive(Debug, Clone)]
pub struct DensityModel<T: Scalar> {
    density: Fn1D<T>,
    weight: Weight<T>,
}

impl<T: Scalar> DensityModel<T> {
    /// Validates `f >= 0` on a sample grid and `|int f w - 1| <= MASS_TOL`.
    pub fn new(density: Fn1D<T>, weight: Weight<T>, cfg: &QuadConfig<T>) -> Result<Self> {
        let mass = Self::check_density(&density, &weight, cfg)?;
        if (mass - T::one()).abs() > T::lit(MASS_TOL).max(T::lit(T::DEFAULT_QUAD_TOL) * T::lit(10.0)) {
            return Err(Error::DensityMass { mass: mass.as_f64() });
        }
        Ok(Self { density, weight })
    }

    /// Rescales `density` so the weighted mass is exactly 1.
    pub fn normalized(density: Fn1D<T>, weight: Weight<T>, cfg: &QuadConfig<T>) -> Result<Self> {
        let mass = Self::check_density(&density, &weight, cfg)?;
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::DensityMass { mass: mass.as_f64() });
        }
        Ok(Self {
            density: density.affine(T::one() / mass, T::zero()),
            weight,
        })
    }

    fn check_density(density: &Fn1D<T>, weight: &Weight<T>, cfg: &QuadConfig<T>) -> Result<T> {
        let (a, b) = weight.domain();
        for k in 0..DENSITY_SAMPLES {
            let t = a + (b - a) * T::lit(k as f64 / (DENSITY_SAMPLES - 1) as f64);
            let v = density.eval(t);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    t: t.as_f64(),
                    value: v.as_f64(),
                });
            }
            if v < T::zero() {
                return Err(Error::NegativeDensity {
                    t: t.as_f64(),
                    value: v.as_f64(),
                });
            }
        }
        weighted_integral(density, weight, a, b, cfg)
    }

    pub fn density(&self) -> &Fn1D<T> {
        &self.density
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    pub fn domain(&self) -> (T, T) {
        self.weight.domain()
    }
}

/// `F_w(x) = int_a^x f w`, clamped to `[0, 1]` against roundoff.
pub fn cdf_value<T: Scalar>(model: &DensityModel<T>, x: T, cfg: &QuadConfig<T>) -> Result<T> {
    let (a, _) = model.domain();
    let v = weighted_integral(&model.density, &model.weight, a, x, cfg)?;
    Ok(v.max(T::zero()).min(T::one()))
}

/// `R_w(x) = 1 - F_w(x)`.
pub fn reliability<T: Scalar>(model: &DensityModel<T>, x: T, cfg: &QuadConfig<T>) -> Result<T> {
    Ok(T::one() - cdf_value(model, x, cfg)?)
}

/// Left-hand side and bounds of one distribution-function estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfBound<T> {
    pub x: T,
    pub cdf: T,
    pub lhs: T,
    /// The closed-form bounds.
    pub bounds: BoundTriple<T>,
    /// Kernel-norm bounds, valid for every weight.
    pub exact: BoundTriple<T>,
    pub tau: T,
    /// Factor relating `lhs` to `|tau|`.
    pub scale: T,
    /// `lhs - scale * |tau|`.
    pub identity_residual: T,
    pub norms: NormTriple<T>,
}

struct Masses<T> {
    left: T,
    right: T,
    wx: T,
    cdf: T,
    fx: T,
}

fn masses<T: Scalar>(model: &DensityModel<T>, params: &TauParams<T>, cfg: &QuadConfig<T>) -> Result<Masses<T>> {
    let kernel = WeightedKernel::new(*params, &model.weight, cfg)?;
    Ok(Masses {
        left: kernel.left_mass(),
        right: kernel.right_mass(),
        wx: model.weight.eval(params.x)?,
        cdf: cdf_value(model, params.x, cfg)?,
        fx: model.density.eval(params.x),
    })
}

fn model_params<T: Scalar>(model: &DensityModel<T>, x: T, alpha: T, beta: T) -> Result<TauParams<T>> {
    let (a, b) = model.domain();
    TauParams::new(a, b, x, alpha, beta)
}

/// `|(alpha m(x,b) - beta m(a,x)) F_w(x) - m(a,x) [(alpha+beta) m(x,b) f(x) - beta]|`
/// with the closed-form bounds scaled by `(alpha+beta) m(a,x) m(x,b)`.
pub fn cdf_bound_general<T: Scalar>(
    model: &DensityModel<T>,
    params: &TauParams<T>,
    p: T,
    cfg: &QuadConfig<T>,
) -> Result<CdfBound<T>> {
    let m = masses(model, params, cfg)?;
    let (alpha, beta) = (params.alpha, params.beta);
    let sum = params.sum();
    let lhs = ((alpha * m.right - beta * m.left) * m.cdf - m.left * (sum * m.right * m.fx - beta)).abs();
    let scale = sum * m.left * m.right;
    let norms = derivative_norms(&model.density, p, params.a, params.b, cfg)?;
    let q = norms.q();
    let bounds = paper_factors(params, &model.weight, q, cfg)?.times_norms(&norms).scale(scale);
    let exact = exact_factors(params, &model.weight, q, cfg)?.times_norms(&norms).scale(scale);
    let tau_value = tau(&model.density, &model.weight, params, cfg)?.value;
    Ok(CdfBound {
        x: params.x,
        cdf: m.cdf,
        lhs,
        bounds,
        exact,
        tau: tau_value,
        scale,
        identity_residual: lhs - scale * tau_value.abs(),
        norms,
    })
}

/// The `alpha = beta = 1/2` case, evaluated from its own closed forms.
pub fn cdf_bound_symmetric<T: Scalar>(model: &DensityModel<T>, x: T, p: T, cfg: &QuadConfig<T>) -> Result<CdfBound<T>> {
    let half = T::lit(0.5);
    let params = model_params(model, x, half, half)?;
    let (a, b) = (params.a, params.b);
    let m = masses(model, &params, cfg)?;
    let lhs = (half * (m.right - m.left) * m.cdf - m.left * (m.right * m.fx - half)).abs();
    let scale = m.left * m.right;
    let norms = derivative_norms(&model.density, p, a, b, cfg)?;
    let q = norms.q();
    let bracket = (x - a).powi(2) / m.left + (b - x).powi(2) / m.right;
    let bounds = BoundTriple::new(
        T::lit(0.25) * (m.right * (x - a).powi(2) + m.left * (b - x).powi(2)) * m.wx * norms.inf,
        scale / (T::lit(2.0) * (q + T::one()).powf(T::one() / q)) * (bracket * m.wx).powf(T::one() / q) * norms.p,
        half * scale * norms.one,
    );
    let exact = exact_factors(&params, &model.weight, q, cfg)?.times_norms(&norms).scale(scale);
    let tau_value = tau(&model.density, &model.weight, &params, cfg)?.value;
    Ok(CdfBound {
        x,
        cdf: m.cdf,
        lhs,
        bounds,
        exact,
        tau: tau_value,
        scale,
        identity_residual: lhs - scale * tau_value.abs(),
        norms,
    })
}

/// The one-sided (`beta = 0`) estimate of `F_w(x)` by `m(a,x) f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfLeftBound<T> {
    pub x: T,
    pub cdf: T,
    /// `|m(a,x) f(x) - F_w(x)|`.
    pub lhs: T,
    /// `|m(a,x) f(x) / (x - a) - F_w(x)|`, an alternative normalisation that
    /// agrees with `lhs` only when `x - a = 1`.
    pub alt_lhs: T,
    /// `(x-a)^2 w(x)/2 ||f'||_inf`, `(x-a)^(1+1/q) w(x) ||f'||_p / (q+1)^(1/q)`,
    /// `(x-a) ||f'||_1`.
    pub printed: BoundTriple<T>,
    /// `m(a,x)` times the closed-form factors with `beta = 0`; equals
    /// `printed` for a constant unit weight.
    pub derived: BoundTriple<T>,
    /// `m(a,x)` times the kernel-norm bounds with `beta = 0`.
    pub exact: BoundTriple<T>,
    pub norms: NormTriple<T>,
}

pub fn cdf_bound_left<T: Scalar>(model: &DensityModel<T>, x: T, p: T, cfg: &QuadConfig<T>) -> Result<CdfLeftBound<T>> {
    let params = model_params(model, x, T::one(), T::zero())?;
    let a = params.a;
    let m = masses(model, &params, cfg)?;
    let lhs = (m.left * m.fx - m.cdf).abs();
    let alt_lhs = (m.left * m.fx / (x - a) - m.cdf).abs();
    let norms = derivative_norms(&model.density, p, params.a, params.b, cfg)?;
    let q = norms.q();
    let printed = BoundTriple::new(
        (x - a).powi(2) / T::lit(2.0) * m.wx * norms.inf,
        (x - a).powf(T::one() + T::one() / q) * m.wx * norms.p / (q + T::one()).powf(T::one() / q),
        (x - a) * norms.one,
    );
    let derived = paper_factors(&params, &model.weight, q, cfg)?.times_norms(&norms).scale(m.left);
    let exact = exact_factors(&params, &model.weight, q, cfg)?.times_norms(&norms).scale(m.left);
    Ok(CdfLeftBound {
        x,
        cdf: m.cdf,
        lhs,
        alt_lhs,
        printed,
        derived,
        exact,
        norms,
    })
}

/// `int_a^b F_w(u) du - (b - int_a^b u w(u) f(u) du)`, the outer integral
/// computed by nesting quadratures.
pub fn expectation_identity_check<T: Scalar>(model: &DensityModel<T>, cfg: &QuadConfig<T>) -> Result<T> {
    let (a, b) = model.domain();
    let inner_err = std::cell::RefCell::new(None);
    let area = integrate(
        |u| match cdf_value(model, u, cfg) {
            Ok(v) => v,
            Err(e) => {
                inner_err.borrow_mut().get_or_insert(e);
                T::nan()
            }
        },
        a,
        b,
        cfg,
    );
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    let area = area?.value;
    let density = model.density.clone();
    let moment_fn = Fn1D::new("u f(u)", move |u| u * density.eval(u));
    let expectation = weighted_integral(&moment_fn, &model.weight, a, b, cfg)?;
    Ok(area - (b - expectation))
}

/// Norms of `F_w' = f w`, for bounds stated in terms of the distribution
/// function's own derivative.
pub fn fw_norms<T: Scalar>(model: &DensityModel<T>, p: T, cfg: &QuadConfig<T>) -> Result<NormTriple<T>> {
    let (a, b) = model.domain();
    let (f, w) = (model.density.clone(), model.weight.clone());
    let g = Fn1D::new("f w", move |t| f.eval(t) * w.value(t)).with_breakpoints(model.density.breakpoints().to_vec());
    Ok(NormTriple::new(norm_inf(&g, a, b)?, norm_p(&g, p, a, b, cfg)?, norm_one(&g, a, b, cfg)?, p))
}

/// One row of a distribution-function report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfRow<T> {
    pub x: T,
    pub cdf: T,
    pub reliability: T,
    pub lhs: T,
    pub bound_inf: T,
    pub bound_p: T,
    pub bound_one: T,
    pub identity_residual: T,
    pub fw_norms: Option<NormTriple<T>>,
}

/// Rows for each point of `x_grid`, in order.
pub fn cdf_report<T: Scalar>(
    model: &DensityModel<T>,
    x_grid: &[T],
    alpha: T,
    beta: T,
    p: T,
    with_fw_norms: bool,
    cfg: &QuadConfig<T>,
) -> Result<Vec<CdfRow<T>>> {
    let fw = if with_fw_norms { Some(fw_norms(model, p, cfg)?) } else { None };
    x_grid
        .iter()
        .map(|&x| {
            let params = model_params(model, x, alpha, beta)?;
            let r = cdf_bound_general(model, &params, p, cfg)?;
            Ok(CdfRow {
                x,
                cdf: r.cdf,
                reliability: T::one() - r.cdf,
                lhs: r.lhs,
                bound_inf: r.bounds.inf,
                bound_p: r.bounds.p,
                bound_one: r.bounds.one,
                identity_residual: r.identity_residual,
                fw_norms: fw,
            })
        })
        .collect()
}
