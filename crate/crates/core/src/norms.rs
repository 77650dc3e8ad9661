//! Lebesgue norms of a function on a subinterval.
//!
//! The sup norm is an estimate, not a certificate: `|g|` is sampled on 1024
//! Chebyshev-Lobatto nodes and the eight best samples are refined by
//! golden-section search. The result is never below the largest sample.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, Fn1D, QuadConfig};
use crate::scalar::Scalar;

pub const SUP_SAMPLES: usize = 1024;
pub const SUP_REFINED_BRACKETS: usize = 8;
pub const SUP_REFINE_TOL: f64 = 1e-12;

/// Which Lebesgue norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormKind<T> {
    Inf,
    P(T),
    One,
}

/// A norm value together with what it measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue<T> {
    pub kind: NormKind<T>,
    pub value: T,
    pub interval: (T, T),
}

impl<T: Scalar> NormValue<T> {
    /// Hölder conjugate `q = p / (p - 1)` for a finite `p > 1`.
    pub fn conjugate(&self) -> Option<T> {
        match self.kind {
            NormKind::P(p) => Some(conjugate_exponent(p)),
            _ => None,
        }
    }
}

/// The three norms `||g||_inf`, `||g||_p`, `||g||_1` on one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormTriple<T> {
    pub inf: T,
    pub p: T,
    pub one: T,
    pub exponent: T,
}

impl<T: Scalar> NormTriple<T> {
    pub fn new(inf: T, p: T, one: T, exponent: T) -> Self {
        Self { inf, p, one, exponent }
    }

    /// Conjugate exponent `q` of the stored `p`.
    pub fn q(&self) -> T {
        conjugate_exponent(self.exponent)
    }
}

pub fn conjugate_exponent<T: Scalar>(p: T) -> T {
    p / (p - T::one())
}

pub(crate) fn check_exponent<T: Scalar>(p: T, strict: bool) -> Result<()> {
    let ok = p.is_finite() && if strict { p > T::one() } else { p >= T::one() };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "p".into(),
            value: p.as_f64(),
            reason: if strict { "exponent must be finite and > 1" } else { "exponent must be finite and >= 1" },
        })
    }
}

fn abs_checked<T: Scalar>(g: &Fn1D<T>, t: T) -> Result<T> {
    let v = g.eval(t);
    if v.is_finite() {
        Ok(v.abs())
    } else {
        Err(Error::NonFinite {
            t: t.as_f64(),
            value: v.as_f64(),
        })
    }
}

/// Maximises `h` on `[lo, hi]` by golden-section search; returns the best
/// point visited.
pub fn golden_section_max<T: Scalar>(
    h: impl Fn(T) -> Result<T>,
    mut lo: T,
    mut hi: T,
    tol: T,
) -> Result<(T, T)> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = h(x1)?;
    let mut f2 = h(x2)?;
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    // Each step shrinks the bracket by 0.618; 200 steps is far past any tolerance.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = h(x1)?;
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = h(x2)?;
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

/// Estimate of `sup_{[c, d]} |g|`.
pub fn norm_inf<T: Scalar>(g: &Fn1D<T>, c: T, d: T) -> Result<T> {
    let (c, d) = if c <= d { (c, d) } else { (d, c) };
    if c == d {
        return abs_checked(g, c);
    }
    let n = SUP_SAMPLES - 1;
    let half = (d - c) * T::lit(0.5);
    let mid = c + half;
    // Ascending Chebyshev-Lobatto nodes, endpoints pinned exactly.
    let nodes: Vec<T> = (0..=n)
        .map(|k| match k {
            0 => c,
            _ if k == n => d,
            _ => mid - half * (T::PI() * T::lit(k as f64) / T::lit(n as f64)).cos(),
        })
        .collect();
    let values = nodes.iter().map(|&t| abs_checked(g, t)).collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("finite").then(i.cmp(&j)));
    let mut best = values[order[0]];
    for &i in order.iter().take(SUP_REFINED_BRACKETS) {
        let lo = nodes[i.saturating_sub(1)];
        let hi = nodes[(i + 1).min(n)];
        let (_, v) = golden_section_max(|t| abs_checked(g, t), lo, hi, T::lit(SUP_REFINE_TOL))?;
        best = best.max(v);
    }
    Ok(best)
}

/// `(int_c^d |g|^p)^(1/p)` for finite `p >= 1`.
pub fn norm_p<T: Scalar>(g: &Fn1D<T>, p: T, c: T, d: T, cfg: &QuadConfig<T>) -> Result<T> {
    check_exponent(p, false)?;
    let (c, d) = if c <= d { (c, d) } else { (d, c) };
    let integrand = |t: T| {
        let v = g.eval(t).abs();
        if p == T::one() {
            v
        } else {
            v.powf(p)
        }
    };
    let est = integrate_with_breaks(integrand, c, d, g.breakpoints(), cfg)?;
    let total = est.value.max(T::zero());
    Ok(if p == T::one() { total } else { total.powf(T::one() / p) })
}

pub fn norm_one<T: Scalar>(g: &Fn1D<T>, c: T, d: T, cfg: &QuadConfig<T>) -> Result<T> {
    norm_p(g, T::one(), c, d, cfg)
}

/// Any single norm, tagged with its kind and interval.
pub fn norm<T: Scalar>(g: &Fn1D<T>, kind: NormKind<T>, c: T, d: T, cfg: &QuadConfig<T>) -> Result<NormValue<T>> {
    let value = match kind {
        NormKind::Inf => norm_inf(g, c, d)?,
        NormKind::P(p) => {
            check_exponent(p, true)?;
            norm_p(g, p, c, d, cfg)?
        }
        NormKind::One => norm_one(g, c, d, cfg)?,
    };
    Ok(NormValue {
        kind,
        value,
        interval: (c.min(d), c.max(d)),
    })
}

/// `||f'||_inf`, `||f'||_p`, `||f'||_1` on `[c, d]`.
pub fn derivative_norms<T: Scalar>(f: &Fn1D<T>, p: T, c: T, d: T, cfg: &QuadConfig<T>) -> Result<NormTriple<T>> {
    check_exponent(p, true)?;
    let df = f.derivative_fn(c.min(d), c.max(d));
    Ok(NormTriple {
        inf: norm_inf(&df, c, d)?,
        p: norm_p(&df, p, c, d, cfg)?,
        one: norm_one(&df, c, d, cfg)?,
        exponent: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    #[test]
    fn sup_examples() {
        let g = Fn1D::new("2t", |t: f64| 2.0 * t);
        assert_eq!(norm_inf(&g, 0.0, 1.0).unwrap(), 2.0);
        let g = Fn1D::new("cos", f64::cos);
        assert_abs_diff_eq!(norm_inf(&g, 0.0, PI).unwrap(), 1.0, epsilon = 1e-15);
        let g = Fn1D::new("sin10", |t: f64| (10.0 * t).sin());
        let v = norm_inf(&g, 0.0, 1.0).unwrap();
        assert!(v <= 1.0);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sup_refines_beyond_samples() {
        // Narrow peak placed between sampling nodes.
        let g = Fn1D::new("peak", |t: f64| (-1e6 * (t - 0.123_456_7).powi(2)).exp());
        let v = norm_inf(&g, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lp_examples() {
        let g = Fn1D::new("2t", |t: f64| 2.0 * t);
        assert_abs_diff_eq!(norm_p(&g, 1.0, 0.0, 1.0, &cfg()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(norm_p(&g, 2.0, 0.0, 1.0, &cfg()).unwrap(), 2.0 / 3f64.sqrt(), epsilon = 1e-13);
        let z = Fn1D::constant(0.0);
        assert_eq!(norm_p(&z, 2.0, 0.0, 1.0, &cfg()).unwrap(), 0.0);
        assert_eq!(norm_inf(&z, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn exponent_validation() {
        let g = Fn1D::new("t", |t: f64| t);
        assert!(norm_p(&g, 0.5, 0.0, 1.0, &cfg()).is_err());
        assert!(norm(&g, NormKind::P(1.0), 0.0, 1.0, &cfg()).is_err());
        assert!(derivative_norms(&g, f64::INFINITY, 0.0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn non_finite_sample_is_an_error() {
        let g = Fn1D::new("pole", |t: f64| 1.0 / t);
        assert!(matches!(norm_inf(&g, 0.0, 1.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, v) = golden_section_max(|t: f64| Ok(-(t - 0.3).powi(2)), 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert!(v <= 0.0 && v > -1e-12);
    }

    #[test]
    fn derivative_norms_of_cubic() {
        let f = Fn1D::new("t^3", |t: f64| t.powi(3)).with_derivative(|t| 3.0 * t * t);
        let n = derivative_norms(&f, 2.0, 0.0, 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(n.inf, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.one, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.p, (9.0f64 / 5.0).sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(n.q(), 2.0, epsilon = 1e-15);
    }
}
