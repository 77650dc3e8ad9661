//! The weighted Peano kernel and its norms.
//!
//! For a point `x` in `[a, b]` and coefficients `alpha, beta >= 0`,
//!
//! ```text
//! rho(x, t) = alpha/(alpha+beta) * m(a, t) / m(a, x)   for a <= t <= x
//!           = beta/(alpha+beta)  * m(b, t) / m(x, b)   for x <  t <= b
//! ```
//!
//! with oriented moments, so the right branch is nonpositive. Integrating
//! `rho * f'` over `[a, b]` reproduces the deviation `tau` exactly, which
//! makes `||rho||_1`, `||rho||_q` and `sup |rho|` the sound Hölder
//! companions of `||f'||_inf`, `||f'||_p` and `||f'||_1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::check_exponent;
use crate::quad::{integrate_with_breaks, weighted_integral, Fn1D, QuadConfig};
use crate::scalar::Scalar;
use crate::weights::Weight;

/// Interval, evaluation point and coefficients of the deviation functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauParams<T> {
    pub a: T,
    pub b: T,
    pub x: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> TauParams<T> {
    /// Validates `a < b`, `x` in `[a, b]`, `alpha, beta >= 0` not both zero,
    /// and that each branch with a positive coefficient has positive length.
    pub fn new(a: T, b: T, x: T, alpha: T, beta: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval {
                a: a.as_f64(),
                b: b.as_f64(),
                reason: "need finite a < b",
            });
        }
        if !(x >= a && x <= b) {
            return Err(Error::Domain {
                t: x.as_f64(),
                a: a.as_f64(),
                b: b.as_f64(),
            });
        }
        let coeff_err = |reason| Error::InvalidCoefficients {
            alpha: alpha.as_f64(),
            beta: beta.as_f64(),
            reason,
        };
        if !(alpha >= T::zero() && beta >= T::zero()) || !alpha.is_finite() || !beta.is_finite() {
            return Err(coeff_err("coefficients must be finite and nonnegative"));
        }
        if alpha + beta == T::zero() {
            return Err(coeff_err("coefficients must not both be zero"));
        }
        if alpha > T::zero() && x == a {
            return Err(coeff_err("alpha > 0 needs x > a"));
        }
        if beta > T::zero() && x == b {
            return Err(coeff_err("beta > 0 needs x < b"));
        }
        Ok(Self { a, b, x, alpha, beta })
    }

    pub fn sum(&self) -> T {
        self.alpha + self.beta
    }

    pub fn midpoint(&self) -> T {
        (self.a + self.b) * T::lit(0.5)
    }

    pub fn with_x(&self, x: T) -> Result<Self> {
        Self::new(self.a, self.b, x, self.alpha, self.beta)
    }

    pub fn with_coefficients(&self, alpha: T, beta: T) -> Result<Self> {
        Self::new(self.a, self.b, self.x, alpha, beta)
    }
}

/// The kernel for one `(params, weight)` pair, with both branch masses
/// computed up front.
#[derive(Debug, Clone)]
pub struct WeightedKernel<'w, T: Scalar> {
    params: TauParams<T>,
    weight: &'w Weight<T>,
    cfg: QuadConfig<T>,
    left_mass: T,
    right_mass: T,
}

impl<'w, T: Scalar> WeightedKernel<'w, T> {
    pub fn new(params: TauParams<T>, weight: &'w Weight<T>, cfg: &QuadConfig<T>) -> Result<Self> {
        let (wa, wb) = weight.domain();
        if wa != params.a || wb != params.b {
            return Err(Error::InvalidInterval {
                a: params.a.as_f64(),
                b: params.b.as_f64(),
                reason: "parameter interval differs from the weight's domain",
            });
        }
        let left_mass = weight.moment(params.a, params.x, cfg)?;
        let right_mass = weight.moment(params.x, params.b, cfg)?;
        if params.alpha > T::zero() && weight.is_degenerate_mass(left_mass) {
            return Err(Error::DegenerateMass {
                c: params.a.as_f64(),
                d: params.x.as_f64(),
                mass: left_mass.as_f64(),
            });
        }
        if params.beta > T::zero() && weight.is_degenerate_mass(right_mass) {
            return Err(Error::DegenerateMass {
                c: params.x.as_f64(),
                d: params.b.as_f64(),
                mass: right_mass.as_f64(),
            });
        }
        Ok(Self {
            params,
            weight,
            cfg: *cfg,
            left_mass,
            right_mass,
        })
    }

    pub fn params(&self) -> &TauParams<T> {
        &self.params
    }

    pub fn weight(&self) -> &Weight<T> {
        self.weight
    }

    /// `m(a, x)`.
    pub fn left_mass(&self) -> T {
        self.left_mass
    }

    /// `m(x, b)`.
    pub fn right_mass(&self) -> T {
        self.right_mass
    }

    fn left_branch(&self, t: T) -> T {
        let p = &self.params;
        if p.alpha == T::zero() {
            return T::zero();
        }
        // A failed inner quadrature becomes NaN, which the outer integrator
        // reports as a non-finite value.
        let m = match self.weight.closed_moment(p.a, t) {
            Some(m) => m,
            None => self.weight.moment_numeric(p.a, t, &self.cfg).unwrap_or(T::nan()),
        };
        p.alpha / p.sum() * m / self.left_mass
    }

    fn right_branch(&self, t: T) -> T {
        let p = &self.params;
        if p.beta == T::zero() {
            return T::zero();
        }
        // Oriented m(b, t) = -int_t^b w, nonpositive.
        let m = match self.weight.closed_moment(p.b, t) {
            Some(m) => m,
            None => self.weight.moment_numeric(p.b, t, &self.cfg).unwrap_or(T::nan()),
        };
        p.beta / p.sum() * m / self.right_mass
    }

    /// `rho(x, t)`, with `t` in `[a, b]`.
    pub fn value(&self, t: T) -> Result<T> {
        self.weight.check_point(t)?;
        Ok(self.value_unchecked(t))
    }

    fn value_unchecked(&self, t: T) -> T {
        if t <= self.params.x {
            self.left_branch(t)
        } else {
            self.right_branch(t)
        }
    }

    fn abs_integral(&self, power: Option<T>, breaks: &[T]) -> Result<T> {
        let p = &self.params;
        let g = |t: T| {
            let v = self.value_unchecked(t).abs();
            match power {
                Some(q) => v.powf(q),
                None => v,
            }
        };
        let mut total = T::zero();
        if p.alpha > T::zero() {
            total = total + integrate_with_breaks(g, p.a, p.x, breaks, &self.cfg)?.value;
        }
        if p.beta > T::zero() {
            total = total + integrate_with_breaks(g, p.x, p.b, breaks, &self.cfg)?.value;
        }
        Ok(total)
    }

    /// `int_a^b |rho(x, t)| dt`, companion of `||f'||_inf`.
    pub fn l1(&self) -> Result<T> {
        self.abs_integral(None, &[])
    }

    /// `(int_a^b |rho(x, t)|^q dt)^(1/q)` for `q > 1`, companion of `||f'||_p`.
    pub fn lq(&self, q: T) -> Result<T> {
        check_exponent(q, true)?;
        Ok(self.abs_integral(Some(q), &[])?.powf(T::one() / q))
    }

    /// `sup_t |rho(x, t)|`, companion of `||f'||_1`.
    ///
    /// Each branch is monotone in `t` (moments of a nonnegative weight), so
    /// the supremum is the larger of the two one-sided values at `t = x`.
    pub fn sup(&self) -> T {
        let x = self.params.x;
        self.left_branch(x).abs().max(self.right_branch(x).abs())
    }

    /// `int_a^b rho(x, t) f'(t) dt`.
    pub fn apply_to_derivative(&self, f: &Fn1D<T>) -> Result<T> {
        let p = &self.params;
        let g = |t: T| self.value_unchecked(t) * f.derivative_within(t, p.a, p.b);
        let mut total = T::zero();
        if p.alpha > T::zero() {
            total = total + integrate_with_breaks(g, p.a, p.x, f.breakpoints(), &self.cfg)?.value;
        }
        if p.beta > T::zero() {
            total = total + integrate_with_breaks(g, p.x, p.b, f.breakpoints(), &self.cfg)?.value;
        }
        Ok(total)
    }

    /// `f(x) - (alpha N(a,x)/m(a,x) + beta N(x,b)/m(x,b)) / (alpha + beta)`.
    pub fn identity_rhs(&self, f: &Fn1D<T>) -> Result<T> {
        let p = &self.params;
        let mut combo = T::zero();
        if p.alpha > T::zero() {
            combo = combo + p.alpha * weighted_integral(f, self.weight, p.a, p.x, &self.cfg)? / self.left_mass;
        }
        if p.beta > T::zero() {
            combo = combo + p.beta * weighted_integral(f, self.weight, p.x, p.b, &self.cfg)? / self.right_mass;
        }
        Ok(f.eval(p.x) - combo / p.sum())
    }

    /// Kernel side minus mean side of the weighted identity.
    pub fn identity_residual(&self, f: &Fn1D<T>) -> Result<T> {
        Ok(self.apply_to_derivative(f)? - self.identity_rhs(f)?)
    }
}

/// `rho(x, t)` for a single `t`.
pub fn peano_kernel<T: Scalar>(params: &TauParams<T>, w: &Weight<T>, t: T, cfg: &QuadConfig<T>) -> Result<T> {
    WeightedKernel::new(*params, w, cfg)?.value(t)
}

/// Montgomery kernel `P(x, t)`: `t - a` for `t <= x`, `t - b` otherwise.
pub fn montgomery_kernel<T: Scalar>(x: T, t: T, a: T, b: T) -> Result<T> {
    if !(t >= a && t <= b) {
        return Err(Error::Domain {
            t: t.as_f64(),
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    Ok(if t <= x { t - a } else { t - b })
}

pub fn kernel_l1<T: Scalar>(params: &TauParams<T>, w: &Weight<T>, cfg: &QuadConfig<T>) -> Result<T> {
    WeightedKernel::new(*params, w, cfg)?.l1()
}

pub fn kernel_lq<T: Scalar>(params: &TauParams<T>, w: &Weight<T>, q: T, cfg: &QuadConfig<T>) -> Result<T> {
    WeightedKernel::new(*params, w, cfg)?.lq(q)
}

pub fn kernel_sup<T: Scalar>(params: &TauParams<T>, w: &Weight<T>, cfg: &QuadConfig<T>) -> Result<T> {
    Ok(WeightedKernel::new(*params, w, cfg)?.sup())
}

pub fn identity_residual<T: Scalar>(
    f: &Fn1D<T>,
    params: &TauParams<T>,
    w: &Weight<T>,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    WeightedKernel::new(*params, w, cfg)?.identity_residual(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    fn unit(x: f64, alpha: f64, beta: f64) -> TauParams<f64> {
        TauParams::new(0.0, 1.0, x, alpha, beta).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(TauParams::new(0.0, 1.0, 0.5, 0.0, 0.0).is_err());
        assert!(TauParams::new(0.0, 1.0, 0.5, -1.0, 1.0).is_err());
        assert!(TauParams::new(0.0, 1.0, 1.5, 1.0, 1.0).is_err());
        assert!(TauParams::new(0.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(TauParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(TauParams::new(1.0, 0.0, 0.5, 1.0, 1.0).is_err());
        assert!(TauParams::new(0.0, 1.0, 1.0, 1.0, 0.0).is_ok());
        assert!(TauParams::new(0.0, 1.0, 0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn kernel_values() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        let p = unit(0.5, 1.0, 1.0);
        assert_abs_diff_eq!(peano_kernel(&p, &u, 0.25, &cfg()).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(peano_kernel(&p, &u, 0.75, &cfg()).unwrap(), -0.25, epsilon = 1e-15);
        let d = Weight::decreasing(0.0, 1.0).unwrap();
        assert_eq!(peano_kernel(&unit(0.3, 2.0, 1.0), &d, 0.0, &cfg()).unwrap(), 0.0);
        assert!(peano_kernel(&p, &u, 1.1, &cfg()).is_err());
    }

    #[test]
    fn montgomery_values() {
        assert_abs_diff_eq!(montgomery_kernel(0.3, 0.2, 0.0, 1.0).unwrap(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(montgomery_kernel(0.3, 0.8, 0.0, 1.0).unwrap(), -0.2, epsilon = 1e-15);
        assert_eq!(montgomery_kernel(0.3, 1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(montgomery_kernel(0.3, -0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_branch_mass() {
        // Weight vanishing on [0, 0.4].
        let w = Weight::from_fn("ramp", 0.0, 1.0, |t: f64| (t - 0.4).max(0.0)).unwrap();
        let err = WeightedKernel::new(unit(0.3, 1.0, 1.0), &w, &cfg()).unwrap_err();
        assert!(matches!(err, Error::DegenerateMass { .. }));
        // Zero coefficient on the empty branch is fine.
        assert!(WeightedKernel::new(unit(0.3, 0.0, 1.0), &w, &cfg()).is_ok());
    }

    #[test]
    fn sup_of_branches() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        assert_eq!(kernel_sup(&unit(0.5, 1.0, 1.0), &u, &cfg()).unwrap(), 0.5);
        assert_abs_diff_eq!(kernel_sup(&unit(0.5, 1.0, 3.0), &u, &cfg()).unwrap(), 0.75, epsilon = 1e-15);
        assert_eq!(kernel_sup(&unit(0.5, 1.0, 0.0), &u, &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn lq_rejects_small_exponent() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        assert!(kernel_lq(&unit(0.5, 1.0, 1.0), &u, 1.0, &cfg()).is_err());
    }

    #[test]
    fn identity_on_constant() {
        let u = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        let f = Fn1D::constant(3.0);
        let r = identity_residual(&f, &unit(0.4, 2.0, 1.0), &u, &cfg()).unwrap();
        assert!(r.abs() <= 1e-12);
    }
}
