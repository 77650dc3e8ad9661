//! Adaptive Gauss-Kronrod integration, the [`Fn1D`] function wrapper, and
//! weighted integral means.
//!
//! The engine is a global adaptive scheme: the integration range is split at
//! any known breakpoints, each piece is estimated with the 7-point Gauss /
//! 15-point Kronrod pair, and the piece with the largest error estimate is
//! bisected until the summed estimate drops below the tolerance or the
//! subdivision budget is exhausted.
//!
//! Endpoint singularities of the form `(t - c)^e` with `-1 < e < 0` are
//! removed by the substitution `t = c + s^k`, `k = 1 / (1 + e)`, which makes
//! the transformed integrand bounded.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weights::Weight;

/// Nodes of the 15-point Kronrod rule on [-1, 1] (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Weights of the embedded 7-point Gauss rule (nodes `XGK[1]`, `XGK[3]`,
/// `XGK[5]` and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(T::DEFAULT_QUAD_TOL),
            rel_tol: T::zero(),
            max_subdivisions: 1000,
        }
    }
}

impl<T: Scalar> QuadConfig<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidConfig("abs_tol must be positive and finite"));
        }
        if !(self.rel_tol >= T::zero()) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidConfig("rel_tol must be nonnegative and finite"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    fn target(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value of an integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A real function of one real variable.
///
/// Besides the evaluator it may carry a closed-form derivative and
/// antiderivative (used by oracle checks and the norm estimators), and a list
/// of breakpoints where the function or its derivative is not smooth.
/// Integration routines split at breakpoints that fall inside their range.
#[derive(Clone)]
pub struct Fn1D<T> {
    label: String,
    eval: ScalarFn<T>,
    derivative: Option<ScalarFn<T>>,
    antiderivative: Option<ScalarFn<T>>,
    breakpoints: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Fn1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fn1D")
            .field("label", &self.label)
            .field("derivative", &self.derivative.is_some())
            .field("antiderivative", &self.antiderivative.is_some())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl<T: Scalar> Fn1D<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(f),
            derivative: None,
            antiderivative: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn constant(k: T) -> Self {
        Self::new(format!("{k}"), move |_| k).with_derivative(|_| T::zero())
    }

    pub fn with_derivative(mut self, df: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    pub fn with_antiderivative(mut self, big_f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.antiderivative = Some(Arc::new(big_f));
        self
    }

    pub fn with_breakpoints(mut self, mut breaks: Vec<T>) -> Self {
        breaks.retain(|b| b.is_finite());
        breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        breaks.dedup();
        self.breakpoints = breaks;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        (self.eval)(t)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn closed_derivative(&self, t: T) -> Option<T> {
        self.derivative.as_ref().map(|df| df(t))
    }

    pub fn antiderivative(&self, t: T) -> Option<T> {
        self.antiderivative.as_ref().map(|big_f| big_f(t))
    }

    /// `f'(t)`, from the closed form when it is present and finite, otherwise
    /// by finite differences. Differences are one-sided when a central
    /// stencil would leave `[lo, hi]`.
    pub fn derivative_within(&self, t: T, lo: T, hi: T) -> T {
        if let Some(v) = self.closed_derivative(t) {
            if v.is_finite() {
                return v;
            }
        }
        finite_difference(&*self.eval, t, lo, hi)
    }

    /// The derivative as a function of its own, restricted to `[lo, hi]` for
    /// the purpose of choosing finite-difference stencils.
    pub fn derivative_fn(&self, lo: T, hi: T) -> Fn1D<T> {
        let this = self.clone();
        Fn1D::new(format!("d/dt[{}]", self.label), move |t| {
            this.derivative_within(t, lo, hi)
        })
        .with_breakpoints(self.breakpoints.clone())
    }

    /// `lambda * f + shift`, carrying derivative and antiderivative along.
    pub fn affine(&self, lambda: T, shift: T) -> Fn1D<T> {
        let f = self.eval.clone();
        let mut out = Fn1D::new(
            format!("{lambda}*({}) + {shift}", self.label),
            move |t| lambda * f(t) + shift,
        );
        if let Some(df) = self.derivative.clone() {
            out = out.with_derivative(move |t| lambda * df(t));
        }
        if let Some(big_f) = self.antiderivative.clone() {
            out = out.with_antiderivative(move |t| lambda * big_f(t) + shift * t);
        }
        out.with_breakpoints(self.breakpoints.clone())
    }

    /// Pointwise `self + other`.
    pub fn sum(&self, other: &Fn1D<T>) -> Fn1D<T> {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let mut out = Fn1D::new(format!("({}) + ({})", self.label, other.label), move |t| {
            f(t) + g(t)
        });
        if let (Some(df), Some(dg)) = (self.derivative.clone(), other.derivative.clone()) {
            out = out.with_derivative(move |t| df(t) + dg(t));
        }
        let mut breaks = self.breakpoints.clone();
        breaks.extend_from_slice(&other.breakpoints);
        out.with_breakpoints(breaks)
    }
}

/// Central difference with step `eps^(1/3) * max(1, |t|)`, falling back to a
/// second-order one-sided stencil near the ends of `[lo, hi]`.
pub fn finite_difference<T: Scalar>(f: &dyn Fn(T) -> T, t: T, lo: T, hi: T) -> T {
    let two = T::lit(2.0);
    let h = T::epsilon().cbrt() * T::one().max(t.abs());
    if t - h >= lo && t + h <= hi {
        (f(t + h) - f(t - h)) / (two * h)
    } else if t + two * h <= hi {
        (T::lit(-3.0) * f(t) + T::lit(4.0) * f(t + h) - f(t + two * h)) / (two * h)
    } else {
        (T::lit(3.0) * f(t) - T::lit(4.0) * f(t - h) + f(t - two * h)) / (two * h)
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    lo: T,
    hi: T,
    value: T,
    error: T,
    /// Floating-point noise floor of `error`.
    roundoff: T,
}

fn kronrod15<T: Scalar>(g: &dyn Fn(T) -> T, lo: T, hi: T) -> Result<Segment<T>> {
    let half = (hi - lo) * T::lit(0.5);
    let center = lo + half;
    let check = |t: T, v: T| -> Result<T> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                t: t.as_f64(),
                value: v.as_f64(),
            })
        }
    };
    let fc = check(center, g(center))?;
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_abs = fc.abs() * T::lit(WGK[7]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let (t1, t2) = (center - dx, center + dx);
        let f1 = check(t1, g(t1))?;
        let f2 = check(t2, g(t2))?;
        res_k = res_k + T::lit(WGK[j]) * (f1 + f2);
        res_abs = res_abs + T::lit(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let width = half.abs();
    let roundoff = T::lit(50.0) * T::epsilon() * res_abs * width;
    Ok(Segment {
        lo,
        hi,
        value: res_k * half,
        error: ((res_k - res_g) * half).abs().max(roundoff),
        roundoff,
    })
}

/// Global adaptive integration over an initial ascending partition.
fn adaptive<T: Scalar>(g: &dyn Fn(T) -> T, nodes: &[T], cfg: &QuadConfig<T>) -> Result<Estimate<T>> {
    cfg.validate()?;
    let mut segments = Vec::with_capacity(nodes.len().max(2) * 4);
    for pair in nodes.windows(2) {
        if pair[1] > pair[0] {
            segments.push(kronrod15(g, pair[0], pair[1])?);
        }
    }
    if segments.is_empty() {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            subdivisions: 0,
        });
    }
    loop {
        let (value, error) = segments
            .iter()
            .fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
        // Once every segment sits on its noise floor, splitting cannot help.
        if error <= cfg.target(value) || segments.iter().all(|s| s.error <= s.roundoff) {
            return Ok(Estimate {
                value,
                error,
                subdivisions: segments.len(),
            });
        }
        let (worst, seg) = segments
            .iter()
            .enumerate()
            .fold((0, segments[0]), |best, (i, s)| if s.error > best.1.error { (i, *s) } else { best });
        let mid = seg.lo + (seg.hi - seg.lo) * T::lit(0.5);
        if segments.len() >= cfg.max_subdivisions || !(mid > seg.lo && mid < seg.hi) {
            return Err(Error::NoConvergence {
                c: nodes[0].as_f64(),
                d: nodes[nodes.len() - 1].as_f64(),
                estimate: error.as_f64(),
                tolerance: cfg.target(value).as_f64(),
                subdivisions: segments.len(),
            });
        }
        segments[worst] = kronrod15(g, seg.lo, mid)?;
        segments.push(kronrod15(g, mid, seg.hi)?);
    }
}

fn partition<T: Scalar>(c: T, d: T, breaks: &[T]) -> Vec<T> {
    let mut nodes = Vec::with_capacity(breaks.len() + 2);
    nodes.push(c);
    nodes.extend(breaks.iter().copied().filter(|&b| b > c && b < d));
    nodes.push(d);
    nodes
}

fn check_limits<T: Scalar>(c: T, d: T) -> Result<()> {
    if c.is_finite() && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInterval {
            a: c.as_f64(),
            b: d.as_f64(),
            reason: "integration limits must be finite",
        })
    }
}

/// Oriented integral of `g` over `[c, d]`; the sign flips when `d < c`.
pub fn integrate<T: Scalar>(g: impl Fn(T) -> T, c: T, d: T, cfg: &QuadConfig<T>) -> Result<Estimate<T>> {
    integrate_with_breaks(g, c, d, &[], cfg)
}

/// As [`integrate`], with the range additionally split at `breaks`.
pub fn integrate_with_breaks<T: Scalar>(
    g: impl Fn(T) -> T,
    c: T,
    d: T,
    breaks: &[T],
    cfg: &QuadConfig<T>,
) -> Result<Estimate<T>> {
    check_limits(c, d)?;
    if d < c {
        let est = adaptive(&g, &partition(d, c, breaks), cfg)?;
        return Ok(Estimate {
            value: -est.value,
            ..est
        });
    }
    adaptive(&g, &partition(c, d, breaks), cfg)
}

/// Integral over `[c, d]` (with `c <= d`) of a function that may blow up like
/// `(t - c)^left` and/or `(d - t)^right` at the ends, exponents in `(-1, 0)`.
pub fn integrate_endpoint_singular<T: Scalar>(
    g: impl Fn(T) -> T,
    c: T,
    d: T,
    left: Option<T>,
    right: Option<T>,
    breaks: &[T],
    cfg: &QuadConfig<T>,
) -> Result<Estimate<T>> {
    check_limits(c, d)?;
    let singular = |e: Option<T>| e.filter(|&e| e < T::zero() && e > -T::one());
    let (left, right) = (singular(left), singular(right));
    if d <= c || (left.is_none() && right.is_none()) {
        return integrate_with_breaks(g, c, d, breaks, cfg);
    }
    let (split, left_part) = match (left, right) {
        (Some(_), Some(_)) => {
            let m = c + (d - c) * T::lit(0.5);
            (m, true)
        }
        (Some(_), None) => (d, true),
        _ => (c, false),
    };
    let mut value = T::zero();
    let mut error = T::zero();
    let mut subdivisions = 0;
    if left_part {
        let k = T::one() / (T::one() + left.unwrap_or(T::zero()));
        let s_hi = (split - c).powf(T::one() / k);
        let mapped: Vec<T> = breaks
            .iter()
            .filter(|&&b| b > c && b < split)
            .map(|&b| (b - c).powf(T::one() / k))
            .collect();
        let est = adaptive(
            &|s: T| k * s.powf(k - T::one()) * g(c + s.powf(k)),
            &partition(T::zero(), s_hi, &mapped),
            cfg,
        )?;
        value = value + est.value;
        error = error + est.error;
        subdivisions += est.subdivisions;
    }
    if let Some(e) = right {
        let k = T::one() / (T::one() + e);
        let s_hi = (d - split).powf(T::one() / k);
        let mut mapped: Vec<T> = breaks
            .iter()
            .filter(|&&b| b > split && b < d)
            .map(|&b| (d - b).powf(T::one() / k))
            .collect();
        mapped.reverse();
        let est = adaptive(
            &|s: T| k * s.powf(k - T::one()) * g(d - s.powf(k)),
            &partition(T::zero(), s_hi, &mapped),
            cfg,
        )?;
        value = value + est.value;
        error = error + est.error;
        subdivisions += est.subdivisions;
    } else if split < d {
        let est = integrate_with_breaks(&g, split, d, breaks, cfg)?;
        value = value + est.value;
        error = error + est.error;
        subdivisions += est.subdivisions;
    }
    Ok(Estimate {
        value,
        error,
        subdivisions,
    })
}

/// Oriented `N(c, d) = int_c^d f(t) w(t) dt`.
pub fn weighted_integral<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    c: T,
    d: T,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    w.check_point(c)?;
    w.check_point(d)?;
    if c == d {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if c < d { (c, d, T::one()) } else { (d, c, -T::one()) };
    let (left, right) = w.endpoint_exponents();
    let (a, b) = w.domain();
    let est = integrate_endpoint_singular(
        |t| f.eval(t) * w.value(t),
        lo,
        hi,
        left.filter(|_| lo == a),
        right.filter(|_| hi == b),
        f.breakpoints(),
        cfg,
    )?;
    Ok(sign * est.value)
}

/// Weighted integral mean `N(c, d) / m(c, d)`.
///
/// Fails with [`Error::DegenerateMass`] when `|m(c, d)|` falls below the
/// scalar's mass floor relative to the total mass of the weight.
pub fn weighted_mean<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    c: T,
    d: T,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    let mass = w.moment(c, d, cfg)?;
    w.check_mass(c, d, mass)?;
    // Dividing by a small mass magnifies the integration error, so tighten
    // the tolerance with it (down to a millionth).
    let scale = mass.abs().min(T::one()).max(T::lit(1e-6));
    if scale < T::one() {
        let fine = cfg.with_abs_tol(cfg.abs_tol * scale);
        let mass = if w.has_closed_moment() { mass } else { w.moment(c, d, &fine)? };
        return Ok(weighted_integral(f, w, c, d, &fine)? / mass);
    }
    Ok(weighted_integral(f, w, c, d, cfg)? / mass)
}

/// Plain integral mean `(1 / (d - c)) int_c^d f`.
pub fn unweighted_mean<T: Scalar>(f: &Fn1D<T>, c: T, d: T, cfg: &QuadConfig<T>) -> Result<T> {
    if !(c < d) {
        return Err(Error::InvalidInterval {
            a: c.as_f64(),
            b: d.as_f64(),
            reason: "mean needs c < d",
        });
    }
    let est = integrate_with_breaks(|t| f.eval(t), c, d, f.breakpoints(), cfg)?;
    Ok(est.value / (d - c))
}
