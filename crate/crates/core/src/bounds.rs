//! Right-hand sides of every bound on the deviation functionals.
//!
//! Two families are kept side by side:
//!
//! * **closed forms** (`paper_*`), the three-branch expressions involving
//!   `(x-a)^2 / m(a,x)`, `(b-x)^2 / m(x,b)` and the point value `w(x)`.
//!   They coincide with the kernel norms for a constant weight and can be
//!   smaller than `|tau|` otherwise;
//! * **exact** (`exact_*`), kernel norm times derivative norm, which Hölder's
//!   inequality guarantees to dominate `|tau|` for every admissible weight.
//!
//! The unweighted classics (Ostrowski, the Montgomery-identity bounds and the
//! two-mean bounds with coefficients) are provided for reduction checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::tau;
use crate::kernel::{TauParams, WeightedKernel};
use crate::norms::{check_exponent, conjugate_exponent, derivative_norms, norm_inf, NormTriple};
use crate::quad::{weighted_mean, Fn1D, QuadConfig};
use crate::scalar::Scalar;
use crate::weights::Weight;

/// One value per norm branch: `||f'||_inf`, `||f'||_p`, `||f'||_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTriple<T> {
    pub inf: T,
    pub p: T,
    pub one: T,
}

impl<T: Scalar> BoundTriple<T> {
    pub fn new(inf: T, p: T, one: T) -> Self {
        Self { inf, p, one }
    }

    /// Branch-wise product of norm factors with the norms themselves.
    pub fn times_norms(&self, norms: &NormTriple<T>) -> Self {
        Self::new(self.inf * norms.inf, self.p * norms.p, self.one * norms.one)
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.inf * k, self.p * k, self.one * k)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.inf), f(self.p), f(self.one))
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.inf, self.p, self.one]
    }
}

/// `deviation / bound`, 0 when both vanish and +inf when only the bound does.
pub fn ratio<T: Scalar>(deviation: T, bound: T) -> T {
    if bound > T::zero() {
        deviation / bound
    } else if deviation == T::zero() {
        T::zero()
    } else {
        T::infinity()
    }
}

/// Closed-form factors multiplying `||f'||_inf`, `||f'||_p`, `||f'||_1`.
/// `q` is the conjugate of `p`.
pub fn paper_factors<T: Scalar>(
    params: &TauParams<T>,
    w: &Weight<T>,
    q: T,
    cfg: &QuadConfig<T>,
) -> Result<BoundTriple<T>> {
    check_exponent(q, true)?;
    let kernel = WeightedKernel::new(*params, w, cfg)?;
    let p = params;
    let sum = p.sum();
    let wx = w.eval(p.x)?;
    let mut inf_bracket = T::zero();
    let mut p_bracket = T::zero();
    if p.alpha > T::zero() {
        let left = (p.x - p.a).powi(2) / kernel.left_mass();
        inf_bracket = inf_bracket + p.alpha * left;
        p_bracket = p_bracket + p.alpha.powf(q) * left;
    }
    if p.beta > T::zero() {
        let right = (p.b - p.x).powi(2) / kernel.right_mass();
        inf_bracket = inf_bracket + p.beta * right;
        p_bracket = p_bracket + p.beta.powf(q) * right;
    }
    let inf = inf_bracket * wx / (T::lit(2.0) * sum);
    let p_factor = (p_bracket * wx).powf(T::one() / q) / ((q + T::one()).powf(T::one() / q) * sum);
    let one = T::lit(0.5) * (T::one() + (p.alpha - p.beta).abs() / sum);
    Ok(BoundTriple::new(inf, p_factor, one))
}

/// Kernel norms `||rho||_1`, `||rho||_q`, `sup |rho|`.
pub fn exact_factors<T: Scalar>(
    params: &TauParams<T>,
    w: &Weight<T>,
    q: T,
    cfg: &QuadConfig<T>,
) -> Result<BoundTriple<T>> {
    let kernel = WeightedKernel::new(*params, w, cfg)?;
    Ok(BoundTriple::new(kernel.l1()?, kernel.lq(q)?, kernel.sup()))
}

/// The closed-form three-branch bound on `|tau|`.
pub fn bounds_paper<T: Scalar>(
    params: &TauParams<T>,
    w: &Weight<T>,
    norms: &NormTriple<T>,
    cfg: &QuadConfig<T>,
) -> Result<BoundTriple<T>> {
    Ok(paper_factors(params, w, norms.q(), cfg)?.times_norms(norms))
}

/// Kernel-norm times derivative-norm bounds on `|tau|`.
pub fn bounds_exact<T: Scalar>(
    params: &TauParams<T>,
    w: &Weight<T>,
    norms: &NormTriple<T>,
    cfg: &QuadConfig<T>,
) -> Result<BoundTriple<T>> {
    Ok(exact_factors(params, w, norms.q(), cfg)?.times_norms(norms))
}

/// Deviation ratios against both bound families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRatios<T> {
    pub paper: BoundTriple<T>,
    pub exact: BoundTriple<T>,
}

/// Everything known about one `(f, w, params, p)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet<T> {
    pub tau: T,
    /// `|tau|`.
    pub deviation: T,
    pub paper: BoundTriple<T>,
    pub exact: BoundTriple<T>,
    pub paper_factors: BoundTriple<T>,
    pub exact_factors: BoundTriple<T>,
    pub norms: NormTriple<T>,
    pub ratios: BoundRatios<T>,
}

impl<T: Scalar> BoundSet<T> {
    /// Whether every exact bound dominates the deviation, up to `rel_tol`.
    pub fn is_sound(&self, rel_tol: T) -> bool {
        self.exact
            .as_array()
            .iter()
            .all(|&b| self.deviation <= b * (T::one() + rel_tol) + T::epsilon())
    }

    pub fn paper_is_sound(&self, rel_tol: T) -> bool {
        self.paper
            .as_array()
            .iter()
            .all(|&b| self.deviation <= b * (T::one() + rel_tol) + T::epsilon())
    }
}

pub fn bound_set<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    p: T,
    cfg: &QuadConfig<T>,
) -> Result<BoundSet<T>> {
    let norms = derivative_norms(f, p, params.a, params.b, cfg)?;
    let q = norms.q();
    let tau_value = tau(f, w, params, cfg)?.value;
    let deviation = tau_value.abs();
    let paper_factors = paper_factors(params, w, q, cfg)?;
    let exact_factors = exact_factors(params, w, q, cfg)?;
    let paper = paper_factors.times_norms(&norms);
    let exact = exact_factors.times_norms(&norms);
    Ok(BoundSet {
        tau: tau_value,
        deviation,
        paper,
        exact,
        paper_factors,
        exact_factors,
        norms,
        ratios: BoundRatios {
            paper: paper.map(|b| ratio(deviation, b)),
            exact: exact.map(|b| ratio(deviation, b)),
        },
    })
}

fn check_point<T: Scalar>(x: T, a: T, b: T) -> Result<()> {
    if !(a < b) {
        return Err(Error::InvalidInterval {
            a: a.as_f64(),
            b: b.as_f64(),
            reason: "need a < b",
        });
    }
    if x >= a && x <= b {
        Ok(())
    } else {
        Err(Error::Domain {
            t: x.as_f64(),
            a: a.as_f64(),
            b: b.as_f64(),
        })
    }
}

/// Unweighted two-mean bounds with coefficients `alpha`, `beta`.
pub fn bounds_cerone<T: Scalar>(
    x: T,
    alpha: T,
    beta: T,
    a: T,
    b: T,
    norms: &NormTriple<T>,
) -> Result<BoundTriple<T>> {
    let params = TauParams::new(a, b, x, alpha, beta)?;
    let sum = params.sum();
    let q = norms.q();
    let inf = (alpha * (x - a) + beta * (b - x)) / (T::lit(2.0) * sum);
    let p = (alpha.powf(q) * (x - a) + beta.powf(q) * (b - x)).powf(T::one() / q)
        / (sum * (q + T::one()).powf(T::one() / q));
    let one = T::lit(0.5) * (T::one() + (alpha - beta).abs() / sum);
    Ok(BoundTriple::new(inf, p, one).times_norms(norms))
}

/// Montgomery-identity bounds on `|f(x) - M(f; a, b)|`.
pub fn bounds_dragomir<T: Scalar>(x: T, a: T, b: T, norms: &NormTriple<T>) -> Result<BoundTriple<T>> {
    check_point(x, a, b)?;
    let len = b - a;
    let mid = (a + b) * T::lit(0.5);
    let q = norms.q();
    let inf = ((len * T::lit(0.5)).powi(2) + (x - mid).powi(2)) / len;
    let p = (((x - a).powf(q + T::one()) + (b - x).powf(q + T::one())) / (q + T::one())).powf(T::one() / q) / len;
    let one = (len * T::lit(0.5) + (x - mid).abs()) / len;
    Ok(BoundTriple::new(inf, p, one).times_norms(norms))
}

/// Ostrowski's bound `[((b-a)/2)^2 + (x-(a+b)/2)^2] M / (b-a)`.
pub fn bound_ostrowski<T: Scalar>(x: T, a: T, b: T, sup_norm: T) -> Result<T> {
    check_point(x, a, b)?;
    let half = (b - a) * T::lit(0.5);
    Ok((half * half + (x - (a + b) * T::lit(0.5)).powi(2)) * sup_norm / (b - a))
}

/// Bounds with norms taken per side (`fine`) and over the whole interval
/// (`coarse`). Both are divided by `alpha + beta`, so they bound `|tau|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitBounds<T> {
    pub fine: BoundTriple<T>,
    pub coarse: BoundTriple<T>,
    pub left_norms: NormTriple<T>,
    pub right_norms: NormTriple<T>,
    pub full_norms: NormTriple<T>,
}

pub fn bounds_split<T: Scalar>(
    f: &Fn1D<T>,
    w: &Weight<T>,
    params: &TauParams<T>,
    p: T,
    cfg: &QuadConfig<T>,
) -> Result<SplitBounds<T>> {
    let kernel = WeightedKernel::new(*params, w, cfg)?;
    let pr = params;
    let q = conjugate_exponent(p);
    let wx = w.eval(pr.x)?;
    let two = T::lit(2.0);
    let full = derivative_norms(f, p, pr.a, pr.b, cfg)?;
    let zero = NormTriple::new(T::zero(), T::zero(), T::zero(), p);
    // Norms on an empty side are zero, and so is its coefficient.
    let left = if pr.x > pr.a { derivative_norms(f, p, pr.a, pr.x, cfg)? } else { zero };
    let right = if pr.x < pr.b { derivative_norms(f, p, pr.x, pr.b, cfg)? } else { zero };

    let (mut l_inf, mut l_p) = (T::zero(), T::zero());
    if pr.alpha > T::zero() {
        let sq = (pr.x - pr.a).powi(2) * wx / kernel.left_mass();
        l_inf = pr.alpha * sq / two;
        l_p = pr.alpha * (sq / (q + T::one())).powf(T::one() / q);
    }
    let (mut r_inf, mut r_p) = (T::zero(), T::zero());
    if pr.beta > T::zero() {
        let sq = (pr.b - pr.x).powi(2) * wx / kernel.right_mass();
        r_inf = pr.beta * sq / two;
        r_p = pr.beta * (sq / (q + T::one())).powf(T::one() / q);
    }
    let sum = pr.sum();
    let fine = BoundTriple::new(
        l_inf * left.inf + r_inf * right.inf,
        l_p * left.p + r_p * right.p,
        pr.alpha * left.one + pr.beta * right.one,
    )
    .scale(T::one() / sum);
    let coarse = BoundTriple::new(
        (l_inf + r_inf) * full.inf,
        (l_p + r_p) * full.p,
        sum * full.one,
    )
    .scale(T::one() / sum);
    Ok(SplitBounds {
        fine,
        coarse,
        left_norms: left,
        right_norms: right,
        full_norms: full,
    })
}

/// Specialisations of the main bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CorollaryMode<T> {
    /// `alpha = beta`, evaluation point `x` free.
    EqualCoeffs { x: T },
    /// `x = (a + b) / 2`, coefficients free.
    Midpoint { alpha: T, beta: T },
    /// Both at once.
    MidpointEqual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryResult<T> {
    pub params: TauParams<T>,
    /// The specialised left-hand side, derived from `tau`.
    pub lhs: T,
    pub bounds: BoundTriple<T>,
    /// For the midpoint/equal case, `|f(mid) - M(f, w; a, b) / 2|` as an
    /// alternative reading; not a bounded quantity in general.
    pub alt_lhs: Option<T>,
    pub norms: NormTriple<T>,
}

/// Evaluates a specialised left-hand side and its three-branch bound using
/// the specialised formulas directly.
pub fn corollary_bounds<T: Scalar>(
    mode: CorollaryMode<T>,
    f: &Fn1D<T>,
    w: &Weight<T>,
    p: T,
    cfg: &QuadConfig<T>,
) -> Result<CorollaryResult<T>> {
    let (a, b) = w.domain();
    let mid = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let norms = derivative_norms(f, p, a, b, cfg)?;
    let q = norms.q();
    let root = |v: T| v.powf(T::one() / q);
    let q1 = (q + T::one()).powf(T::one() / q);
    let two = T::lit(2.0);
    let four = T::lit(4.0);

    let params = match mode {
        CorollaryMode::EqualCoeffs { x } => TauParams::new(a, b, x, T::one(), T::one())?,
        CorollaryMode::Midpoint { alpha, beta } => TauParams::new(a, b, mid, alpha, beta)?,
        CorollaryMode::MidpointEqual => TauParams::new(a, b, mid, T::one(), T::one())?,
    };
    let kernel = WeightedKernel::new(params, w, cfg)?;
    let (ml, mr) = (kernel.left_mass(), kernel.right_mass());
    let x = params.x;
    let wx = w.eval(x)?;

    let (lhs, bounds, alt_lhs) = match mode {
        CorollaryMode::EqualCoeffs { .. } | CorollaryMode::MidpointEqual => {
            let left = weighted_mean(f, w, a, x, cfg)?;
            let right = weighted_mean(f, w, x, b, cfg)?;
            let lhs = (f.eval(x) - (left + right) / two).abs();
            let bracket = (x - a).powi(2) / ml + (b - x).powi(2) / mr;
            let bounds = BoundTriple::new(
                bracket * wx * norms.inf / four,
                root(bracket * wx) * norms.p / (two * q1),
                norms.one / two,
            );
            let alt = match mode {
                CorollaryMode::MidpointEqual => {
                    Some((f.eval(x) - weighted_mean(f, w, a, b, cfg)? / two).abs())
                }
                _ => None,
            };
            (lhs, bounds, alt)
        }
        CorollaryMode::Midpoint { alpha, beta } => {
            let lhs = tau(f, w, &params, cfg)?.value.abs();
            let sum = alpha + beta;
            let h2 = half * half;
            let mut inf_bracket = T::zero();
            let mut p_bracket = T::zero();
            if alpha > T::zero() {
                inf_bracket = inf_bracket + alpha / ml * h2;
                p_bracket = p_bracket + alpha.powf(q) / ml * h2;
            }
            if beta > T::zero() {
                inf_bracket = inf_bracket + beta / mr * h2;
                p_bracket = p_bracket + beta.powf(q) / mr * h2;
            }
            let bounds = BoundTriple::new(
                inf_bracket * wx * norms.inf / (two * sum),
                root(p_bracket * wx) * norms.p / (q1 * sum),
                T::lit(0.5) * (T::one() + (alpha - beta).abs() / sum) * norms.one,
            );
            (lhs, bounds, None)
        }
    };
    Ok(CorollaryResult {
        params,
        lhs,
        bounds,
        alt_lhs,
        norms,
    })
}

/// Which exact bound a sharpness search tries to saturate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessKind {
    /// `||rho||_1 ||f'||_inf`, saturated by `f' = sign(rho)`.
    ExactInf,
    /// `sup |rho| ||f'||_1`, approached by a unit-mass spike next to `x`.
    ExactOne,
}

impl SharpnessKind {
    pub fn name(self) -> &'static str {
        match self {
            SharpnessKind::ExactInf => "exact_inf",
            SharpnessKind::ExactOne => "exact_one",
        }
    }
}

/// `f` with `f' = sign(rho(x, .))` and `f(a) = 0`: piecewise linear with a
/// kink at `x`. The sign of each branch is that of its coefficient.
pub fn sign_kernel_function<T: Scalar>(params: &TauParams<T>) -> Fn1D<T> {
    let p = *params;
    let s_left = if p.alpha > T::zero() { T::one() } else { T::zero() };
    let s_right = if p.beta > T::zero() { -T::one() } else { T::zero() };
    Fn1D::new(format!("sign_kernel(x={})", p.x), move |t: T| {
        if t <= p.x {
            s_left * (t - p.a)
        } else {
            s_left * (p.x - p.a) + s_right * (t - p.x)
        }
    })
    .with_derivative(move |t: T| if t <= p.x { s_left } else { s_right })
    .with_breakpoints(vec![p.x])
}

/// Ramp whose derivative is `±1/h` on a width-`h` strip beside `x`, on the
/// side of the larger coefficient.
pub fn spike_function<T: Scalar>(params: &TauParams<T>, width: T) -> Fn1D<T> {
    let p = *params;
    let left_side = p.alpha >= p.beta;
    let (lo, hi, slope) = if left_side {
        let h = width.min(p.x - p.a);
        (p.x - h, p.x, T::one() / h)
    } else {
        let h = width.min(p.b - p.x);
        (p.x, p.x + h, -T::one() / h)
    };
    Fn1D::new(format!("spike(x={})", p.x), move |t: T| slope * (t.max(lo).min(hi) - lo))
        .with_derivative(move |t: T| if t >= lo && t <= hi { slope } else { T::zero() })
        .with_breakpoints(vec![lo, hi])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRow<T> {
    pub x: T,
    pub alpha: T,
    pub beta: T,
    pub deviation: T,
    pub bound: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport<T> {
    pub weight_name: String,
    pub kind: SharpnessKind,
    pub rows: Vec<SharpnessRow<T>>,
    pub best: Option<SharpnessRow<T>>,
}

/// Relative width of the spike used for [`SharpnessKind::ExactOne`].
pub const SPIKE_WIDTH: f64 = 1e-5;

/// Evaluates the extremal construction for one configuration.
pub fn sharpness_row<T: Scalar>(
    w: &Weight<T>,
    params: &TauParams<T>,
    kind: SharpnessKind,
    cfg: &QuadConfig<T>,
) -> Result<SharpnessRow<T>> {
    let kernel = WeightedKernel::new(*params, w, cfg)?;
    let (f, bound) = match kind {
        SharpnessKind::ExactInf => {
            let f = sign_kernel_function(params);
            let df = f.derivative_fn(params.a, params.b);
            let bound = kernel.l1()? * norm_inf(&df, params.a, params.b)?;
            (f, bound)
        }
        SharpnessKind::ExactOne => {
            let f = spike_function(params, T::lit(SPIKE_WIDTH) * (params.b - params.a));
            let df = f.derivative_fn(params.a, params.b);
            let bound = kernel.sup() * crate::norms::norm_one(&df, params.a, params.b, cfg)?;
            (f, bound)
        }
    };
    let deviation = tau(&f, w, params, cfg)?.value.abs();
    Ok(SharpnessRow {
        x: params.x,
        alpha: params.alpha,
        beta: params.beta,
        deviation,
        bound,
        ratio: ratio(deviation, bound),
    })
}

/// Ratios within this relative distance count as tied.
pub const SHARPNESS_TIE_TOL: f64 = 1e-12;

fn beats<T: Scalar>(r: &SharpnessRow<T>, cur: &SharpnessRow<T>) -> bool {
    let tie = T::lit(SHARPNESS_TIE_TOL) * r.ratio.abs().max(cur.ratio.abs()).max(T::one());
    if (r.ratio - cur.ratio).abs() <= tie {
        r.x < cur.x
    } else {
        r.ratio > cur.ratio
    }
}

/// Runs the extremal construction over a grid of points and coefficient
/// pairs. Rows come back in grid order (x outer); the best ratio breaks ties
/// toward the smaller `x`. Degenerate rows (zero deviation and zero bound) do
/// not compete.
pub fn sharpness_search<T: Scalar>(
    w: &Weight<T>,
    x_grid: &[T],
    coefficients: &[(T, T)],
    kind: SharpnessKind,
    cfg: &QuadConfig<T>,
) -> Result<SharpnessReport<T>> {
    let (a, b) = w.domain();
    let mut rows = Vec::with_capacity(x_grid.len() * coefficients.len());
    for &x in x_grid {
        for &(alpha, beta) in coefficients {
            let params = TauParams::new(a, b, x, alpha, beta)?;
            rows.push(sharpness_row(w, &params, kind, cfg)?);
        }
    }
    let best = rows
        .iter()
        .filter(|r| r.bound > T::zero() && r.ratio.is_finite())
        .fold(None::<SharpnessRow<T>>, |best, r| match best {
            Some(cur) if !beats(r, &cur) => Some(cur),
            _ => Some(*r),
        });
    Ok(SharpnessReport {
        weight_name: w.name().to_string(),
        kind,
        rows,
        best,
    })
}

/// Demonstration that a closed-form bound is too small: the sign-kernel
/// function's deviation against both bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness<T> {
    pub deviation: T,
    pub paper_bound: T,
    pub exact_bound: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow<T> {
    pub weight_name: String,
    pub x: T,
    pub alpha: T,
    pub beta: T,
    pub paper_inf_factor: T,
    pub exact_inf_factor: T,
    /// `paper_inf_factor / exact_inf_factor`.
    pub ratio: T,
    /// The closed form is smaller than the sound kernel norm.
    pub flagged: bool,
    pub witness: Option<Witness<T>>,
}

/// Flag threshold: ratios below `1 - AUDIT_FLAG_TOL` are flagged.
pub const AUDIT_FLAG_TOL: f64 = 1e-9;

/// Compares the closed-form `||f'||_inf` factor with `||rho||_1` for every
/// weight, point and coefficient pair, in that nesting order.
pub fn audit_paper_vs_exact<T: Scalar>(
    weights: &[Weight<T>],
    x_grid: &[T],
    coefficients: &[(T, T)],
    cfg: &QuadConfig<T>,
) -> Result<Vec<AuditRow<T>>> {
    let mut rows = Vec::with_capacity(weights.len() * x_grid.len() * coefficients.len());
    for w in weights {
        let (a, b) = w.domain();
        for &x in x_grid {
            for &(alpha, beta) in coefficients {
                let params = TauParams::new(a, b, x, alpha, beta)?;
                // q only affects the unused middle branch.
                let paper = paper_factors(&params, w, T::lit(2.0), cfg)?.inf;
                let exact = WeightedKernel::new(params, w, cfg)?.l1()?;
                let r = ratio(paper, exact);
                let flagged = r < T::one() - T::lit(AUDIT_FLAG_TOL);
                let witness = if flagged {
                    let row = sharpness_row(w, &params, SharpnessKind::ExactInf, cfg)?;
                    // ||f'||_inf = 1 for the sign kernel.
                    Some(Witness {
                        deviation: row.deviation,
                        paper_bound: paper,
                        exact_bound: row.bound,
                    })
                } else {
                    None
                };
                rows.push(AuditRow {
                    weight_name: w.name().to_string(),
                    x,
                    alpha,
                    beta,
                    paper_inf_factor: paper,
                    exact_inf_factor: exact,
                    ratio: r,
                    flagged,
                    witness,
                });
            }
        }
    }
    Ok(rows)
}
