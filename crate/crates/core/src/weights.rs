//! Weight functions on a finite interval and their oriented moments.
//!
//! A [`Weight`] is a nonnegative integrable density `w` on `[a, b]`. Moments
//! are oriented: `moment(c, d) = int_c^d w`, which is negative for `d < c`.
//! The right branch of the weighted Peano kernel uses exactly such a reversed
//! moment `m(b, t)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_endpoint_singular, QuadConfig};
use crate::scalar::Scalar;

type PointFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type RangeFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Number of interior sample points used to check nonnegativity.
const SAMPLE_POINTS: usize = 257;

/// A nonnegative weight on `[a, b]`.
#[derive(Clone)]
pub struct Weight<T> {
    name: String,
    a: T,
    b: T,
    eval: PointFn<T>,
    closed_moment: Option<RangeFn<T>>,
    exponents: (Option<T>, Option<T>),
    total: T,
}

impl<T: Scalar> fmt::Debug for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("name", &self.name)
            .field("domain", &(self.a, self.b))
            .field("closed_moment", &self.closed_moment.is_some())
            .field("total", &self.total)
            .finish()
    }
}

fn check_domain<T: Scalar>(a: T, b: T) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::InvalidInterval {
            a: a.as_f64(),
            b: b.as_f64(),
            reason: "weight domain needs finite a < b",
        })
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

impl<T: Scalar> Weight<T> {
    fn build(
        name: String,
        a: T,
        b: T,
        eval: PointFn<T>,
        closed_moment: Option<RangeFn<T>>,
        exponents: (Option<T>, Option<T>),
    ) -> Result<Self> {
        check_domain(a, b)?;
        let mut w = Self {
            name,
            a,
            b,
            eval,
            closed_moment,
            exponents,
            total: T::zero(),
        };
        w.validate_samples()?;
        let total = match &w.closed_moment {
            Some(m) => m(a, b),
            None => w.moment_numeric(a, b, &QuadConfig::default())?,
        };
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::DegenerateMass {
                c: a.as_f64(),
                d: b.as_f64(),
                mass: total.as_f64(),
            });
        }
        w.total = total;
        Ok(w)
    }

    fn validate_samples(&self) -> Result<()> {
        let n = T::lit(SAMPLE_POINTS as f64);
        for k in 0..SAMPLE_POINTS {
            let t = self.a + (self.b - self.a) * (T::lit(k as f64) + T::lit(0.5)) / n;
            let v = self.value(t);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    t: t.as_f64(),
                    value: v.as_f64(),
                });
            }
            if v < T::zero() {
                return Err(Error::NegativeWeight {
                    t: t.as_f64(),
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// `w(t) = 1`.
    pub fn uniform(a: T, b: T) -> Result<Self> {
        Self::build(
            "uniform".into(),
            a,
            b,
            Arc::new(|_| T::one()),
            Some(Arc::new(|c, d| d - c)),
            (None, None),
        )
    }

    /// `w(t) = (t - a)^p (b - t)^q` with `p, q > -1`.
    ///
    /// Nonnegative integer exponents and the arcsine case `p = q = -1/2` get
    /// a closed-form moment; negative exponents are integrated with an
    /// endpoint substitution.
    pub fn power(a: T, b: T, p: T, q: T) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > -T::one()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    value: v.as_f64(),
                    reason: "power exponents must exceed -1 for integrability",
                });
            }
        }
        let name = format!("power(p={},q={})", p, q);
        Self::power_named(name, a, b, p, q)
    }

    fn power_named(name: String, a: T, b: T, p: T, q: T) -> Result<Self> {
        check_domain(a, b)?;
        let eval: PointFn<T> = Arc::new(move |t: T| {
            let left = if p == T::zero() { T::one() } else { (t - a).max(T::zero()).powf(p) };
            let right = if q == T::zero() { T::one() } else { (b - t).max(T::zero()).powf(q) };
            left * right
        });
        let len = b - a;
        let is_small_int = |v: T| v >= T::zero() && v.fract() == T::zero() && v <= T::lit(64.0);
        let closed: Option<RangeFn<T>> = if is_small_int(p) && is_small_int(q) {
            let pi = p.as_f64() as u32;
            let qi = q.as_f64() as u32;
            let anti = move |t: T| {
                let u = t - a;
                (0..=qi).fold(T::zero(), |acc, j| {
                    let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                    let e = pi + j + 1;
                    acc + sign
                        * T::lit(binomial(qi, j))
                        * len.powi((qi - j) as i32)
                        * u.powi(e as i32)
                        / T::lit(f64::from(e))
                })
            };
            Some(Arc::new(move |c, d| anti(d) - anti(c)))
        } else if p == T::lit(-0.5) && q == T::lit(-0.5) {
            let anti = move |t: T| {
                let u = ((t - a) / len).max(T::zero()).min(T::one());
                if u <= T::lit(0.5) {
                    T::lit(2.0) * u.sqrt().asin()
                } else {
                    T::PI() - T::lit(2.0) * (T::one() - u).sqrt().asin()
                }
            };
            Some(Arc::new(move |c, d| anti(d) - anti(c)))
        } else {
            None
        };
        let exps = (
            Some(p).filter(|&v| v < T::zero()),
            Some(q).filter(|&v| v < T::zero()),
        );
        Self::build(name, a, b, eval, closed, exps)
    }

    /// `w(t) = t - a`, scaled so that `w(b) = b - a`.
    pub fn increasing(a: T, b: T) -> Result<Self> {
        Self::power_named("increasing".into(), a, b, T::one(), T::zero())
    }

    /// `w(t) = b - t`.
    pub fn decreasing(a: T, b: T) -> Result<Self> {
        Self::power_named("decreasing".into(), a, b, T::zero(), T::one())
    }

    /// `w(t) = ((t - a)(b - t))^(-1/2)`.
    pub fn arcsine(a: T, b: T) -> Result<Self> {
        Self::power_named("arcsine".into(), a, b, T::lit(-0.5), T::lit(-0.5))
    }

    /// `w(t) = exp(-lambda t)`.
    pub fn exponential(a: T, b: T, lambda: T) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda".into(),
                value: lambda.as_f64(),
                reason: "rate must be finite",
            });
        }
        let name = if lambda == T::one() {
            "exponential".to_string()
        } else {
            format!("exponential(lambda={lambda})")
        };
        let closed: RangeFn<T> = if lambda == T::zero() {
            Arc::new(|c, d| d - c)
        } else {
            Arc::new(move |c: T, d: T| -(-lambda * c).exp() * (-lambda * (d - c)).exp_m1() / lambda)
        };
        Self::build(
            name,
            a,
            b,
            Arc::new(move |t: T| (-lambda * t).exp()),
            Some(closed),
            (None, None),
        )
    }

    /// Unnormalised normal profile `exp(-(t - mean)^2 / (2 sd^2))` on `[a, b]`.
    pub fn truncated_normal(a: T, b: T, mean: T, sd: T) -> Result<Self> {
        if !(sd > T::zero()) || !sd.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sd".into(),
                value: sd.as_f64(),
                reason: "standard deviation must be positive",
            });
        }
        if !mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean".into(),
                value: mean.as_f64(),
                reason: "mean must be finite",
            });
        }
        let two = T::lit(2.0);
        Self::build(
            format!("truncated_normal(mean={mean},sd={sd})"),
            a,
            b,
            Arc::new(move |t: T| (-(t - mean).powi(2) / (two * sd * sd)).exp()),
            None,
            (None, None),
        )
    }

    /// A user-supplied weight. Nonnegativity is checked on an interior grid
    /// and moments are always computed numerically.
    pub fn from_fn(
        name: impl Into<String>,
        a: T,
        b: T,
        f: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(name.into(), a, b, Arc::new(f), None, (None, None))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (T, T) {
        (self.a, self.b)
    }

    /// `m(a, b)`, computed once at construction.
    pub fn total_mass(&self) -> T {
        self.total
    }

    pub fn has_closed_moment(&self) -> bool {
        self.closed_moment.is_some()
    }

    /// Exponents of endpoint singularities, if any, at `a` and `b`.
    pub fn endpoint_exponents(&self) -> (Option<T>, Option<T>) {
        self.exponents
    }

    pub fn check_point(&self, t: T) -> Result<()> {
        if t >= self.a && t <= self.b {
            Ok(())
        } else {
            Err(Error::Domain {
                t: t.as_f64(),
                a: self.a.as_f64(),
                b: self.b.as_f64(),
            })
        }
    }

    /// `w(t)` with a domain check. May be `+inf` at a singular endpoint.
    pub fn eval(&self, t: T) -> Result<T> {
        self.check_point(t)?;
        Ok(self.value(t))
    }

    /// `w(t)` without the domain check, for use inside integrands.
    #[inline]
    pub fn value(&self, t: T) -> T {
        (self.eval)(t)
    }

    /// Closed-form oriented moment, when the weight has one.
    pub fn closed_moment(&self, c: T, d: T) -> Option<T> {
        let m = self.closed_moment.as_ref()?;
        Some(if c == d {
            T::zero()
        } else if c < d {
            m(c, d)
        } else {
            -m(d, c)
        })
    }

    /// Oriented moment `int_c^d w`, closed form when available.
    pub fn moment(&self, c: T, d: T, cfg: &QuadConfig<T>) -> Result<T> {
        self.check_point(c)?;
        self.check_point(d)?;
        match self.closed_moment(c, d) {
            Some(m) => Ok(m),
            None => self.moment_numeric(c, d, cfg),
        }
    }

    /// Oriented moment by quadrature, ignoring any closed form.
    pub fn moment_numeric(&self, c: T, d: T, cfg: &QuadConfig<T>) -> Result<T> {
        self.check_point(c)?;
        self.check_point(d)?;
        if c == d {
            return Ok(T::zero());
        }
        let (lo, hi, sign) = if c < d { (c, d, T::one()) } else { (d, c, -T::one()) };
        let est = integrate_endpoint_singular(
            |t| self.value(t),
            lo,
            hi,
            self.exponents.0.filter(|_| lo == self.a),
            self.exponents.1.filter(|_| hi == self.b),
            &[],
            cfg,
        )?;
        Ok(sign * est.value)
    }

    /// Whether `|mass|` is too small, relative to `m(a, b)`, to divide by.
    pub fn is_degenerate_mass(&self, mass: T) -> bool {
        !(mass.abs() >= T::lit(T::MASS_FLOOR) * self.total)
    }

    pub(crate) fn check_mass(&self, c: T, d: T, mass: T) -> Result<()> {
        if self.is_degenerate_mass(mass) {
            Err(Error::DegenerateMass {
                c: c.as_f64(),
                d: d.as_f64(),
                mass: mass.as_f64(),
            })
        } else {
            Ok(())
        }
    }
}

/// Name plus parameters identifying a built-in weight, e.g.
/// `power(p=1,q=0)` or `exponential(lambda=2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl WeightSpec {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            let body: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |reason: &'static str| Error::InvalidParameter {
            name: s.to_string(),
            value: f64::NAN,
            reason,
        };
        let (name, rest) = match s.find('(') {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(bad("empty weight name"));
        }
        let mut spec = WeightSpec::named(name);
        if let Some(rest) = rest {
            let body = rest.strip_suffix(')').ok_or_else(|| bad("missing closing parenthesis"))?;
            for item in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = item.split_once('=').ok_or_else(|| bad("parameters are written key=value"))?;
                let v: f64 = v.trim().parse().map_err(|_| bad("parameter value is not a number"))?;
                spec.params.insert(k.trim().to_string(), v);
            }
        }
        Ok(spec)
    }
}

/// Splits a comma-separated list of weight specs, respecting parentheses.
pub fn split_spec_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out.retain(|x| !x.is_empty());
    out
}

/// Names accepted by [`builtin_weight`].
pub const BUILTIN_WEIGHTS: &[&str] = &[
    "uniform",
    "power",
    "increasing",
    "decreasing",
    "arcsine",
    "exponential",
    "truncated_normal",
];

/// Builds one of the registered weights on `[a, b]`.
pub fn builtin_weight<T: Scalar>(spec: &WeightSpec, a: T, b: T) -> Result<Weight<T>> {
    let allowed: &[&str] = match spec.name.as_str() {
        "uniform" | "increasing" | "decreasing" | "arcsine" => &[],
        "power" => &["p", "q"],
        "exponential" => &["lambda"],
        "truncated_normal" => &["mean", "sd"],
        other => return Err(Error::UnknownWeight(other.to_string())),
    };
    if let Some((k, v)) = spec.params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter {
            name: k.clone(),
            value: *v,
            reason: "not a parameter of this weight",
        });
    }
    let get = |k: &str, default: T| spec.params.get(k).map(|&v| T::lit(v)).unwrap_or(default);
    match spec.name.as_str() {
        "uniform" => Weight::uniform(a, b),
        "increasing" => Weight::increasing(a, b),
        "decreasing" => Weight::decreasing(a, b),
        "arcsine" => Weight::arcsine(a, b),
        "power" => Weight::power(a, b, get("p", T::zero()), get("q", T::zero())),
        "exponential" => Weight::exponential(a, b, get("lambda", T::one())),
        _ => Weight::truncated_normal(
            a,
            b,
            get("mean", (a + b) * T::lit(0.5)),
            get("sd", (b - a) * T::lit(0.25)),
        ),
    }
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
    fn eval_examples() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.eval(0.3).unwrap(), 1.0);
        let d = Weight::decreasing(0.0, 1.0).unwrap();
        assert_eq!(d.eval(1.0).unwrap(), 0.0);
        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(e.eval(0.5).unwrap(), 0.606_530_659_712_633, epsilon = 1e-12);
        assert!(matches!(u.eval(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn moment_examples() {
        let u = Weight::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.moment(0.0, 1.0, &cfg()).unwrap(), 1.0);
        let e = Weight::exponential(0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(e.moment(0.0, 1.0, &cfg()).unwrap(), 1.0 - (-1.0f64).exp(), epsilon = 1e-14);
        let d = Weight::decreasing(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.moment(1.0, 0.9, &cfg()).unwrap(), -0.005, epsilon = 1e-15);
    }

    #[test]
    fn builtin_examples() {
        let u: Weight<f64> = builtin_weight(&WeightSpec::named("uniform"), 0.0, 1.0).unwrap();
        assert_eq!(u.closed_moment(0.2, 0.7), Some(0.7 - 0.2));
        let t: Weight<f64> =
            builtin_weight(&"power(p=1,q=0)".parse().unwrap(), 0.0, 1.0).unwrap();
        assert_eq!(t.eval(0.25).unwrap(), 0.25);
        assert_abs_diff_eq!(t.closed_moment(0.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        let arc: Weight<f64> =
            builtin_weight(&"power(p=-0.5,q=-0.5)".parse().unwrap(), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(arc.moment(0.0, 1.0, &cfg()).unwrap(), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(arc.moment_numeric(0.0, 1.0, &cfg()).unwrap(), PI, epsilon = 1e-10);
    }

    #[test]
    fn builtin_errors() {
        let bad = builtin_weight::<f64>(&WeightSpec::named("cauchy"), 0.0, 1.0);
        assert!(matches!(bad, Err(Error::UnknownWeight(_))));
        let bad = builtin_weight::<f64>(&"power(p=-1)".parse().unwrap(), 0.0, 1.0);
        assert!(matches!(bad, Err(Error::InvalidParameter { .. })));
        let bad = builtin_weight::<f64>(&"uniform(p=2)".parse().unwrap(), 0.0, 1.0);
        assert!(matches!(bad, Err(Error::InvalidParameter { .. })));
        let bad = builtin_weight::<f64>(&"truncated_normal(sd=0)".parse().unwrap(), 0.0, 1.0);
        assert!(matches!(bad, Err(Error::InvalidParameter { .. })));
        assert!(Weight::uniform(1.0, 1.0).is_err());
        assert!(matches!(
            Weight::from_fn("neg", 0.0, 1.0, |t: f64| t - 0.5),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            Weight::from_fn("zero", 0.0, 1.0, |_: f64| 0.0),
            Err(Error::DegenerateMass { .. })
        ));
    }

    #[test]
    fn uniform_moment_is_length() {
        let u = Weight::uniform(-2.0, 3.0).unwrap();
        for &(c, d) in &[(-2.0, 3.0), (0.1, 0.7), (2.5, -1.25)] {
            assert_abs_diff_eq!(u.moment(c, d, &cfg()).unwrap(), d - c, epsilon = 1e-14);
        }
        assert_eq!(u.moment(0.4, 0.4, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let weights: Vec<Weight<f64>> = vec![
            Weight::uniform(0.0, 2.0).unwrap(),
            Weight::increasing(0.0, 2.0).unwrap(),
            Weight::decreasing(0.0, 2.0).unwrap(),
            Weight::power(0.0, 2.0, 3.0, 2.0).unwrap(),
            Weight::arcsine(0.0, 2.0).unwrap(),
            Weight::exponential(0.0, 2.0, 1.7).unwrap(),
        ];
        let pairs = [(0.0, 2.0), (0.3, 1.1), (1.9, 0.2), (0.0, 0.5), (1.5, 2.0)];
        for w in &weights {
            for &(c, d) in &pairs {
                let closed = w.closed_moment(c, d).unwrap();
                let numeric = w.moment_numeric(c, d, &cfg()).unwrap();
                assert_abs_diff_eq!(closed, numeric, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        let spec: WeightSpec = "exponential(lambda=2.5)".parse().unwrap();
        assert_eq!(spec.params["lambda"], 2.5);
        assert_eq!(spec.to_string().parse::<WeightSpec>().unwrap(), spec);
        assert_eq!(
            split_spec_list("uniform, power(p=1,q=2),decreasing"),
            vec!["uniform", "power(p=1,q=2)", "decreasing"]
        );
    }
}
