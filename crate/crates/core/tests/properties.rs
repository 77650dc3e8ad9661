//! Randomised invariants.

mod oracle;

use proptest::prelude::*;

use obw_core::bounds::{bound_set, bounds_exact, bounds_paper, bounds_split};
use obw_core::cdf::{cdf_value, reliability};
use obw_core::expr::{BinOp, Func};
use obw_core::functionals::{tau, tau_combination, tau_decomposed};
use obw_core::kernel::{kernel_sup, montgomery_kernel, peano_kernel};
use obw_core::norms::{derivative_norms, norm_inf, norm_one, norm_p};
use obw_core::quad::{unweighted_mean, weighted_mean};
use obw_core::weights::builtin_weight;
use obw_core::{parse, DensityModel, Expr, Fn1D, NormTriple, QuadConfig, TauParams, Weight, WeightSpec};

const WEIGHTS: [&str; 8] = [
    "uniform",
    "increasing",
    "decreasing",
    "exponential",
    "exponential(lambda=-1.5)",
    "arcsine",
    "power(p=2,q=0.5)",
    "truncated_normal",
];

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn weight(i: usize, a: f64, b: f64) -> Weight {
    builtin_weight(&WEIGHTS[i].parse::<WeightSpec>().unwrap(), a, b).unwrap()
}

fn cubic(c: [f64; 4]) -> Fn1D {
    Fn1D::new("cubic", move |t: f64| c[0] + t * (c[1] + t * (c[2] + t * c[3])))
        .with_derivative(move |t| c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]))
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-3.0..3.0f64)
}

/// `(alpha, beta)` nonnegative and not both zero.
fn pair() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![
        (0.1..5.0f64, 0.1..5.0f64),
        (0.1..5.0f64).prop_map(|a| (a, 0.0)),
        (0.1..5.0f64).prop_map(|b| (0.0, b)),
    ]
}

fn close(l: f64, r: f64, tol: f64) -> bool {
    (l - r).abs() <= tol * (1.0 + l.abs().max(r.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_are_additive_and_oriented(i in 0..WEIGHTS.len(), c in 0.0..1.0f64, d in 0.0..1.0f64, e in 0.0..1.0f64) {
        let w = weight(i, 0.0, 1.0);
        let q = cfg();
        let cd = w.moment(c, d, &q).unwrap();
        let de = w.moment(d, e, &q).unwrap();
        let ce = w.moment(c, e, &q).unwrap();
        prop_assert!((cd + de - ce).abs() <= 1e-9, "{cd} + {de} != {ce}");
        prop_assert!((cd + w.moment(d, c, &q).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(w.moment(c, c, &q).unwrap(), 0.0);
    }

    #[test]
    fn uniform_moment_is_length(a in -5.0..5.0f64, len in 0.1..10.0f64, s in 0.0..1.0f64, r in 0.0..1.0f64) {
        let b = a + len;
        let w = builtin_weight::<f64>(&WeightSpec::named("uniform"), a, b).unwrap();
        let (c, d) = (a + s * len, a + r * len);
        prop_assert!((w.moment(c, d, &cfg()).unwrap() - (d - c)).abs() <= 1e-14 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn weighted_mean_lies_between_extremes(i in 0..WEIGHTS.len(), k in coeffs(), c in 0.0..0.45f64, d in 0.55..1.0f64) {
        let w = weight(i, 0.0, 1.0);
        let f = cubic(k);
        let m = weighted_mean(&f, &w, c, d, &cfg()).unwrap();
        let samples: Vec<f64> = (0..=2000).map(|j| f.eval(c + (d - c) * j as f64 / 2000.0)).collect();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9);
    }

    #[test]
    fn uniform_weighted_mean_is_plain_mean(k in coeffs(), c in -1.0..0.0f64, d in 0.5..2.0f64) {
        let w = builtin_weight::<f64>(&WeightSpec::named("uniform"), -1.0, 2.0).unwrap();
        let f = cubic(k);
        let q = cfg();
        let l = weighted_mean(&f, &w, c, d, &q).unwrap();
        let r = unweighted_mean(&f, c, d, &q).unwrap();
        prop_assert!((l - r).abs() <= 1e-12 * (1.0 + l.abs()));
    }

    #[test]
    fn weighted_mean_is_linear(i in 0..WEIGHTS.len(), k in coeffs(), j in coeffs(), s in -2.0..2.0f64, r in -2.0..2.0f64) {
        let w = weight(i, 0.0, 1.0);
        let q = cfg();
        let (f, g) = (cubic(k), cubic(j));
        let combo: [f64; 4] = std::array::from_fn(|n| s * k[n] + r * j[n]);
        let lhs = weighted_mean(&cubic(combo), &w, 0.1, 0.8, &q).unwrap();
        let rhs = s * weighted_mean(&f, &w, 0.1, 0.8, &q).unwrap() + r * weighted_mean(&g, &w, 0.1, 0.8, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn norms_increase_with_p(k in coeffs(), p in 1.01..6.0f64) {
        let q = cfg();
        let g = cubic(k);
        let one = norm_one(&g, 0.0, 1.0, &q).unwrap();
        let mid = norm_p(&g, p, 0.0, 1.0, &q).unwrap();
        let sup = norm_inf(&g, 0.0, 1.0).unwrap();
        prop_assert!(one <= mid + 1e-9 && mid <= sup + 1e-9, "{one} {mid} {sup}");
        let grid = oracle::grid_sup(|t| g.eval(t), 0.0, 1.0, 4096);
        prop_assert!(sup >= grid);
    }

    #[test]
    fn subinterval_norms_are_smaller(k in coeffs(), c in 0.0..0.5f64, d in 0.5..1.0f64, p in 1.2..4.0f64) {
        let f = cubic(k);
        let q = cfg();
        let full = derivative_norms(&f, p, 0.0, 1.0, &q).unwrap();
        let part = derivative_norms(&f, p, c, d, &q).unwrap();
        prop_assert!(part.inf <= full.inf + 1e-12);
        prop_assert!(part.p <= full.p + 1e-12);
        prop_assert!(part.one <= full.one + 1e-12);
    }

    #[test]
    fn uniform_kernel_reduces_to_montgomery(a in -3.0..3.0f64, len in 0.2..5.0f64, s in 0.05..0.95f64, r in 0.0..1.0f64) {
        let b = a + len;
        let x = a + s * len;
        let t = a + r * len;
        let w = builtin_weight::<f64>(&WeightSpec::named("uniform"), a, b).unwrap();
        let params = TauParams::new(a, b, x, x - a, b - x).unwrap();
        let rho = peano_kernel(&params, &w, t, &cfg()).unwrap();
        let p = montgomery_kernel(x, t, a, b).unwrap();
        prop_assert!(((b - a) * rho - p).abs() <= 1e-12 * (1.0 + len));
    }

    #[test]
    fn kernel_sign_structure(i in 0..WEIGHTS.len(), x in 0.05..0.95f64, (alpha, beta) in pair(), r in 0.0..1.0f64) {
        let w = weight(i, 0.0, 1.0);
        let params = TauParams::new(0.0, 1.0, x, alpha, beta).unwrap();
        let rho = peano_kernel(&params, &w, r, &cfg()).unwrap();
        if r <= x {
            prop_assert!(rho >= 0.0);
        } else {
            prop_assert!(rho <= 0.0);
        }
        let sup = kernel_sup(&params, &w, &cfg()).unwrap();
        prop_assert!((sup - alpha.max(beta) / (alpha + beta)).abs() <= 1e-9);
        prop_assert!(rho.abs() <= sup + 1e-12);
    }

    #[test]
    fn tau_scales_shifts_and_ignores_coefficient_scale(
        i in 0..WEIGHTS.len(), k in coeffs(), x in 0.05..0.95f64, (alpha, beta) in pair(),
        lambda in -4.0..4.0f64, shift in -10.0..10.0f64, mu in 0.1..10.0f64,
    ) {
        let w = weight(i, 0.0, 1.0);
        let q = cfg();
        let f = cubic(k);
        let params = TauParams::new(0.0, 1.0, x, alpha, beta).unwrap();
        let t = tau(&f, &w, &params, &q).unwrap().value;
        let scaled = tau(&f.affine(lambda, 0.0), &w, &params, &q).unwrap().value;
        prop_assert!((scaled - lambda * t).abs() <= 1e-10 * (1.0 + lambda.abs()));
        let shifted = tau(&f.affine(1.0, shift), &w, &params, &q).unwrap().value;
        prop_assert!((shifted - t).abs() <= 1e-10 * (1.0 + shift.abs()));
        let rescaled = params.with_coefficients(mu * alpha, mu * beta).unwrap();
        prop_assert!(close(tau(&f, &w, &rescaled, &q).unwrap().value, t, 1e-12));
    }

    #[test]
    fn equivalent_forms_agree(i in 0..WEIGHTS.len(), k in coeffs(), x in 0.05..0.95f64, (alpha, beta) in pair()) {
        let w = weight(i, 0.0, 1.0);
        let q = cfg();
        let f = cubic(k);
        let params = TauParams::new(0.0, 1.0, x, alpha, beta).unwrap();
        let t = tau(&f, &w, &params, &q).unwrap().value;
        prop_assert!((tau_combination(&f, &w, &params, &q).unwrap() - t).abs() <= 1e-10);
        // The decomposition subtracts multiples of sigma_w, which magnifies
        // quadrature error by that factor.
        let sigma = obw_core::functionals::sigma_w(&w, x, &q).unwrap();
        let d = tau_decomposed(&f, &w, &params, &q).unwrap();
        prop_assert!((d - t).abs() <= 1e-10 * sigma, "{d} vs {t}, sigma {sigma}");
    }

    #[test]
    fn exact_bounds_are_sound(
        i in 0..WEIGHTS.len(), k in coeffs(), x in 0.05..0.95f64, (alpha, beta) in pair(),
        p in prop::sample::select(vec![1.5, 2.0, 3.0]),
    ) {
        let w = weight(i, 0.0, 1.0);
        let f = cubic(k);
        let params = TauParams::new(0.0, 1.0, x, alpha, beta).unwrap();
        let set = bound_set(&f, &w, &params, p, &cfg()).unwrap();
        prop_assert!(set.is_sound(1e-9), "{set:?}");
        for r in set.ratios.exact.as_array() {
            prop_assert!(r <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn uniform_weight_closed_forms_are_exact(k in coeffs(), x in 0.05..0.95f64, (alpha, beta) in pair(), p in 1.2..5.0f64) {
        let w = weight(0, 0.0, 1.0);
        let q = cfg();
        let params = TauParams::new(0.0, 1.0, x, alpha, beta).unwrap();
        let norms = derivative_norms(&cubic(k), p, 0.0, 1.0, &q).unwrap();
        let paper = bounds_paper(&params, &w, &norms, &q).unwrap();
        let exact = bounds_exact(&params, &w, &norms, &q).unwrap();
        for (l, r) in paper.as_array().into_iter().zip(exact.as_array()) {
            prop_assert!(close(l, r, 1e-9), "{l} vs {r}");
        }
    }

    #[test]
    fn bounds_are_linear_in_norms(
        i in 0..WEIGHTS.len(), x in 0.05..0.95f64, (alpha, beta) in pair(),
        n in prop::array::uniform3(0.0..5.0f64), s in 0.0..10.0f64,
    ) {
        let w = weight(i, 0.0, 1.0);
        let q = cfg();
        let params = TauParams::new(0.0, 1.0, x, alpha, beta).unwrap();
        let base = NormTriple::new(n[0], n[1], n[2], 2.5);
        let scaled = NormTriple::new(s * n[0], s * n[1], s * n[2], 2.5);
        for (l, r) in bounds_paper(&params, &w, &scaled, &q).unwrap().as_array().into_iter()
            .zip(bounds_paper(&params, &w, &base, &q).unwrap().as_array()) {
            prop_assert!(close(l, s * r, 1e-12));
        }
        for (l, r) in bounds_exact(&params, &w, &scaled, &q).unwrap().as_array().into_iter()
            .zip(bounds_exact(&params, &w, &base, &q).unwrap().as_array()) {
            prop_assert!(close(l, s * r, 1e-12));
        }
    }

    #[test]
    fn split_bounds_refine_coarse_ones(i in 0..WEIGHTS.len(), k in coeffs(), x in 0.05..0.95f64, (alpha, beta) in pair()) {
        let w = weight(i, 0.0, 1.0);
        let s = bounds_split(&cubic(k), &w, &TauParams::new(0.0, 1.0, x, alpha, beta).unwrap(), 2.0, &cfg()).unwrap();
        prop_assert!(s.coarse.inf >= s.fine.inf - 1e-9);
        prop_assert!(s.coarse.one >= s.fine.one - 1e-9);
    }

    #[test]
    fn cdf_is_monotone_and_complements_reliability(i in 0..3usize, x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let q = cfg();
        let density = [
            Fn1D::constant(1.0),
            Fn1D::new("2t", |t: f64| 2.0 * t),
            Fn1D::new("3t^2", |t: f64| 3.0 * t * t),
        ][i].clone();
        let w = weight(1, 0.0, 1.0);
        let model = DensityModel::normalized(density, w, &q).unwrap();
        let (lo, hi) = (x.min(y), x.max(y));
        let fl = cdf_value(&model, lo, &q).unwrap();
        let fh = cdf_value(&model, hi, &q).unwrap();
        prop_assert!(fl <= fh + 1e-12);
        prop_assert_eq!(fl + reliability(&model, lo, &q).unwrap(), 1.0);
        prop_assert!((cdf_value(&model, 1.0, &q).unwrap() - 1.0).abs() <= 1e-8);
    }
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (0u32..1000).prop_map(|n| Expr::Num(n as f64 / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::Bin(op, Box::new(l), Box::new(r))),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

fn same_value(l: f64, r: f64) -> bool {
    (l.is_nan() && r.is_nan()) || l == r || (l - r).abs() <= 1e-9 * (1.0 + l.abs().max(r.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_round_trips(e in expr_tree(), t in 0.05..2.0f64) {
        let once = parse(&e.to_string()).unwrap();
        let twice = parse(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(same_value(once.eval(t), e.eval(t)), "{} at {t}", e);
    }

    #[test]
    fn derivative_matches_finite_differences(
        src in prop::sample::select(vec![
            "t^3 - 2*t", "sin(3*t)", "exp(-t)*t", "log(1 + t^2)", "sqrt(t + 1)", "cos(t)^2", "t / (1 + t)", "2^t", "t^t",
        ]),
        t in 0.1..0.9f64,
    ) {
        let e = parse(src).unwrap();
        let d = e.differentiate().eval(t);
        let h = 1e-5;
        let fd = (e.eval(t + h) - e.eval(t - h)) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "{src}: {d} vs {fd}");
    }
}

#[test]
fn single_precision_smoke() {
    let q = obw_core::quad::QuadConfig::<f32>::default();
    let w = builtin_weight::<f32>(&WeightSpec::named("exponential"), 0.0, 1.0).unwrap();
    let f = obw_core::quad::Fn1D::<f32>::new("t^2", |t: f32| t * t).with_derivative(|t| 2.0 * t);
    let params = obw_core::kernel::TauParams::<f32>::new(0.0, 1.0, 0.4, 2.0, 1.0).unwrap();
    let set = bound_set(&f, &w, &params, 2.0f32, &q).unwrap();
    let double = bound_set(
        &cubic([0.0, 0.0, 1.0, 0.0]),
        &weight(3, 0.0, 1.0),
        &TauParams::new(0.0, 1.0, 0.4, 2.0, 1.0).unwrap(),
        2.0,
        &cfg(),
    )
    .unwrap();
    assert!((set.tau as f64 - double.tau).abs() <= 1e-5);
    assert!((set.exact.inf as f64 - double.exact.inf).abs() <= 1e-5);
    assert!(set.is_sound(1e-4));
}
