//! Deviation functionals: `S` (deviation from one weighted mean) and `tau`
//! (deviation from a combination of the left and right weighted means), plus
//! the two algebraically equivalent ways of writing `tau`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::TauParams;
use crate::quad::{weighted_mean, Fn1D, QuadConfig};
use crate::scalar::Scalar;
use crate::weights::Weight;

/// `tau` together with the pieces it was assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationResult<T> {
    pub value: T,
    pub f_x: T,
    /// `M(f, w; a, x)`, absent when `alpha = 0`.
    pub left_mean: Option<T>,
    /// `M(f, w; x, b)`, absent when `beta = 0`.
    pub right_mean: Option<T>,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> DeviationResult<T> {
    /// Recomputes `value` from the stored components.
    pub fn recompose(&self) -> T {
        let left = self.left_mean.map_or(T::zero(), |m| self.alpha * m);
        let right = self.right_mean.map_or(T::zero(), |m| self.beta * m);
        self.f_x - (left + right) / (self.alpha + self.beta)
    }
}

fn check_weight_interval<T: Scalar>(params: &TauParams<T>, w: &Weight<T>) -> Result<()> {
    if w.domain() != (params.a, params.b) {
        return Err(Error::InvalidInterval {
            a: params.a.as_f64(),
            b: params.b.as_f64(),
            reason: "parameter interval differs from the weight's domain",
        });
    }
    Ok(())
}

/// `S(f, w; c, d) = f(x) - M(f, w; c, d)`.
pub fn deviation_s<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    x: T,
    c: T,
    d: T,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    if !(x >= c.min(d) && x <= c.max(d)) {
        return Err(Error::Domain {
            t: x.as_f64(),
            a: c.as_f64(),
            b: d.as_f64(),
        });
    }
    Ok(f.eval(x) - weighted_mean(f, w, c, d, cfg)?)
}

/// `tau(x, w; alpha, beta) = f(x) - (alpha M(a,x) + beta M(x,b)) / (alpha + beta)`.
pub fn tau<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    cfg: &QuadConfig<T>,
) -> Result<DeviationResult<T>> {
    check_weight_interval(params, w)?;
    let left_mean = if params.alpha > T::zero() {
        Some(weighted_mean(f, w, params.a, params.x, cfg)?)
    } else {
        None
    };
    let right_mean = if params.beta > T::zero() {
        Some(weighted_mean(f, w, params.x, params.b, cfg)?)
    } else {
        None
    };
    let mut out = DeviationResult {
        value: T::zero(),
        f_x: f.eval(params.x),
        left_mean,
        right_mean,
        alpha: params.alpha,
        beta: params.beta,
    };
    out.value = out.recompose();
    Ok(out)
}

/// `sigma_w(x) = m(a, b) / m(x, b)`.
pub fn sigma_w<T: Scalar>(w: &Weight<T>, x: T, cfg: &QuadConfig<T>) -> Result<T> {
    let (a, b) = w.domain();
    let right = w.moment(x, b, cfg)?;
    w.check_mass(x, b, right)?;
    Ok(w.moment(a, b, cfg)? / right)
}

/// `tau` rewritten through `sigma_w` and the full-interval mean:
/// `f(x) - [(1 - beta/(alpha+beta) sigma) M(a,x) + beta/(alpha+beta) sigma M(a,b)]`.
pub fn tau_decomposed<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    Ok(f.eval(params.x) - decomposed_means(f, w, params, cfg)?)
}

/// The same decomposition with `f(x)` scaled by
/// `(alpha m(a,x)/(x-a) + beta m(x,b)/(b-x)) / (alpha+beta)`, a factor that
/// is 1 only for the unit weight. Kept for the audit log.
pub fn tau_decomposed_scaled<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    let p = params;
    let mut scale = T::zero();
    if p.alpha > T::zero() {
        scale = scale + p.alpha * w.moment(p.a, p.x, cfg)? / (p.x - p.a);
    }
    if p.beta > T::zero() {
        scale = scale + p.beta * w.moment(p.x, p.b, cfg)? / (p.b - p.x);
    }
    Ok(scale / p.sum() * f.eval(p.x) - decomposed_means(f, w, params, cfg)?)
}

fn decomposed_means<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    check_weight_interval(params, w)?;
    let p = params;
    if p.beta == T::zero() {
        return weighted_mean(f, w, p.a, p.x, cfg);
    }
    let full_mean = weighted_mean(f, w, p.a, p.b, cfg)?;
    let ratio = p.beta / p.sum() * sigma_w(w, p.x, cfg)?;
    let left_coeff = T::one() - ratio;
    // With alpha = 0 and x = a the left mean is undefined, but its coefficient
    // 1 - sigma_w(a) vanishes.
    let left = if w.is_degenerate_mass(w.moment(p.a, p.x, cfg)?) {
        T::zero()
    } else {
        left_coeff * weighted_mean(f, w, p.a, p.x, cfg)?
    };
    Ok(left + ratio * full_mean)
}

/// `(alpha S(f,w;a,x) + beta S(f,w;x,b)) / (alpha + beta)`.
pub fn tau_combination<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    check_weight_interval(params, w)?;
    let p = params;
    let mut acc = T::zero();
    if p.alpha > T::zero() {
        acc = acc + p.alpha * deviation_s(f, w, p.x, p.a, p.x, cfg)?;
    }
    if p.beta > T::zero() {
        acc = acc + p.beta * deviation_s(f, w, p.x, p.x, p.b, cfg)?;
    }
    Ok(acc / p.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    fn square() -> Fn1D<f64> {
        Fn1D::new("t^2", |t: f64| t * t).with_derivative(|t| 2.0 * t)
    }

    #[test]
    fn deviation_s_examples() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(deviation_s(&Fn1D::constant(4.0), &e, 0.2, 0.0, 1.0, &cfg()).unwrap(), 0.0, epsilon = 1e-14);
        let lin = Fn1D::new("t", |t: f64| t);
        assert_abs_diff_eq!(deviation_s(&lin, &u, 0.5, 0.0, 1.0, &cfg()).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(deviation_s(&square(), &u, 0.0, 0.0, 1.0, &cfg()).unwrap(), -1.0 / 3.0, epsilon = 1e-14);
        assert!(deviation_s(&square(), &u, 1.5, 0.0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn tau_examples() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        let p = TauParams::new(0.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let lin = Fn1D::new("t", |t: f64| t);
        assert_abs_diff_eq!(tau(&lin, &u, &p, &cfg()).unwrap().value, 0.0, epsilon = 1e-15);
        let r = tau(&square(), &u, &p, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, -1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.left_mean.unwrap(), 1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.right_mean.unwrap(), 7.0 / 12.0, epsilon = 1e-14);
        assert_eq!(r.value, r.recompose());
    }

    #[test]
    fn single_branch_reduces_to_s() {
        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        let f = Fn1D::new("sin", f64::sin);
        let p = TauParams::new(0.0, 1.0, 0.6, 2.0, 0.0).unwrap();
        let t = tau(&f, &e, &p, &cfg()).unwrap();
        assert!(t.right_mean.is_none());
        let s = deviation_s(&f, &e, 0.6, 0.0, 0.6, &cfg()).unwrap();
        assert_abs_diff_eq!(t.value, s, epsilon = 1e-15);
        assert_abs_diff_eq!(tau_combination(&f, &e, &p, &cfg()).unwrap(), s, epsilon = 1e-15);
        assert_abs_diff_eq!(tau_decomposed(&f, &e, &p, &cfg()).unwrap(), s, epsilon = 1e-15);
    }

    #[test]
    fn sigma_examples() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(sigma_w(&u, 0.5, &cfg()).unwrap(), 2.0, epsilon = 1e-15);
        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        assert_eq!(sigma_w(&e, 0.0, &cfg()).unwrap(), 1.0);
        let inc = Weight::increasing(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(sigma_w(&inc, 0.5, &cfg()).unwrap(), 4.0 / 3.0, epsilon = 1e-14);
        assert!(matches!(sigma_w(&u, 1.0, &cfg()), Err(Error::DegenerateMass { .. })));
    }

    #[test]
    fn equivalent_forms_agree() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        let p = TauParams::new(0.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(tau_decomposed(&square(), &u, &p, &cfg()).unwrap(), -1.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(tau_combination(&square(), &u, &p, &cfg()).unwrap(), -1.0 / 12.0, epsilon = 1e-14);

        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        let f = Fn1D::new("sin", f64::sin).with_derivative(f64::cos);
        let p = TauParams::new(0.0, 1.0, 0.3, 2.0, 1.0).unwrap();
        let t = tau(&f, &e, &p, &cfg()).unwrap().value;
        assert_abs_diff_eq!(tau_decomposed(&f, &e, &p, &cfg()).unwrap(), t, epsilon = 1e-10);
        assert_abs_diff_eq!(tau_combination(&f, &e, &p, &cfg()).unwrap(), t, epsilon = 1e-12);
    }

    #[test]
    fn left_endpoint_with_zero_alpha() {
        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        let f = Fn1D::new("sin", f64::sin);
        let p = TauParams::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let t = tau(&f, &e, &p, &cfg()).unwrap().value;
        assert_abs_diff_eq!(tau_decomposed(&f, &e, &p, &cfg()).unwrap(), t, epsilon = 1e-12);
    }

    #[test]
    fn scaled_decomposition_matches_only_for_unit_weight() {
        let f = Fn1D::new("sin", f64::sin);
        let p = TauParams::new(0.0, 1.0, 0.3, 2.0, 1.0).unwrap();
        let u = Weight::uniform(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            tau_decomposed_scaled(&f, &u, &p, &cfg()).unwrap(),
            tau(&f, &u, &p, &cfg()).unwrap().value,
            epsilon = 1e-12
        );
        let d = Weight::decreasing(0.0, 1.0).unwrap();
        let gap = tau_decomposed_scaled(&f, &d, &p, &cfg()).unwrap() - tau(&f, &d, &p, &cfg()).unwrap().value;
        assert!(gap.abs() > 1e-3);
    }
}
