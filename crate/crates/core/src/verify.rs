//! Corpus-wide checks: the kernel identity, soundness of the exact bounds,
//! agreement of the equivalent forms of `tau`, and reductions to the
//! unweighted classics.

use std::fmt;

use serde::Serialize;

use crate::bounds::{
    bound_ostrowski, bound_set, bounds_cerone, bounds_dragomir, bounds_paper, corollary_bounds, CorollaryMode,
};
use crate::corpus::{Case, Corpus, EXPONENTS};
use crate::error::Result;
use crate::functionals::{deviation_s, tau, tau_combination, tau_decomposed};
use crate::kernel::{TauParams, WeightedKernel};
use crate::norms::{derivative_norms, NormTriple};
use crate::quad::QuadConfig;
use crate::scalar::Scalar;
use crate::weights::Weight;

/// Thresholds of the verification suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig<T> {
    pub quad: QuadConfig<T>,
    /// Largest accepted `|identity_residual|`.
    pub identity_tol: T,
    /// Relative slack allowed when comparing `|tau|` with a bound.
    pub soundness_rel_tol: T,
    /// Relative tolerance for closed-form reductions.
    pub reduction_tol: T,
    /// Largest accepted difference between equivalent forms of `tau`.
    pub equivalence_tol: T,
}

impl<T: Scalar> Default for VerifyConfig<T> {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            identity_tol: T::lit(1e-8),
            soundness_rel_tol: T::lit(1e-9),
            reduction_tol: T::lit(1e-12),
            equivalence_tol: T::lit(1e-10),
        }
    }
}

/// The reduction grid: nine interior points and four coefficient pairs.
pub const REDUCTION_X: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const REDUCTION_COEFFICIENTS: [(f64, f64); 4] = [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (1.0, 0.0)];

/// One failed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub suite: &'static str,
    pub case: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteCount {
    pub checks: usize,
    pub failures: usize,
}

impl SuiteCount {
    fn record(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
    }
}

/// Outcome of [`run_verify`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub cases: usize,
    pub identity: SuiteCount,
    pub soundness: SuiteCount,
    pub reductions: SuiteCount,
    pub equivalences: SuiteCount,
    /// Cases where a closed-form bound is below `|tau|`. Not a failure:
    /// the closed forms are only guaranteed for a constant weight.
    pub paper_violations: SuiteCount,
    /// Points where the equal-coefficient bound and the Montgomery bound
    /// differ. Not a failure: they bound different functionals away from
    /// the midpoint.
    pub midpoint_comparison: SuiteCount,
    pub max_identity_residual: f64,
    pub max_equivalence_gap: f64,
    pub max_exact_ratio: f64,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.identity.failures == 0
            && self.soundness.failures == 0
            && self.reductions.failures == 0
            && self.equivalences.failures == 0
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "identity: {} failures, soundness: {} failures, reductions: {} failures",
            self.identity.failures, self.soundness.failures, self.reductions.failures
        )?;
        writeln!(f, "equivalences: {} failures", self.equivalences.failures)?;
        writeln!(
            f,
            "cases: {}; checks: identity {}, soundness {}, reductions {}, equivalences {}",
            self.cases, self.identity.checks, self.soundness.checks, self.reductions.checks, self.equivalences.checks
        )?;
        writeln!(
            f,
            "max |identity residual| {:.3e}, max equivalence gap {:.3e}, max |tau|/exact {:.6}",
            self.max_identity_residual, self.max_equivalence_gap, self.max_exact_ratio
        )?;
        writeln!(
            f,
            "closed-form bounds below |tau| (informational): {} of {}",
            self.paper_violations.failures, self.paper_violations.checks
        )?;
        writeln!(
            f,
            "equal-coefficient vs Montgomery bound differ (informational): {} of {} points",
            self.midpoint_comparison.failures, self.midpoint_comparison.checks
        )?;
        for fail in &self.failures {
            writeln!(f, "FAIL [{}] {}: {}", fail.suite, fail.case, fail.detail)?;
        }
        Ok(())
    }
}

fn rel_close<T: Scalar>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol * T::one().max(a.abs()).max(b.abs())
}

fn case_label<T: Scalar>(corpus: &Corpus<T>, case: &Case<T>) -> String {
    let p = &case.params;
    format!(
        "f={} w={} x={} alpha={} beta={}",
        corpus.functions[case.function].label(),
        corpus.weights[case.weight].name(),
        p.x,
        p.alpha,
        p.beta
    )
}

struct Recorder<'r> {
    report: &'r mut VerifyReport,
}

impl Recorder<'_> {
    fn fail(&mut self, suite: &'static str, case: String, detail: String) {
        self.report.failures.push(Failure { suite, case, detail });
    }
}

/// Runs every suite over `corpus` and the fixed reduction grid.
pub fn run_verify<T: Scalar>(corpus: &Corpus<T>, cfg: &VerifyConfig<T>) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let cases = corpus.cases()?;
    report.cases = cases.len();
    let mut rec = Recorder { report: &mut report };
    for case in &cases {
        check_case(corpus, case, cfg, &mut rec);
    }
    check_reductions(cfg, &mut rec);
    Ok(report)
}

fn check_case<T: Scalar>(corpus: &Corpus<T>, case: &Case<T>, cfg: &VerifyConfig<T>, rec: &mut Recorder<'_>) {
    let f = &corpus.functions[case.function];
    let w = &corpus.weights[case.weight];
    let params = &case.params;
    let q = &cfg.quad;
    let label = || case_label(corpus, case);

    // identity
    let residual = WeightedKernel::new(*params, w, q).and_then(|k| k.identity_residual(f));
    match residual {
        Ok(r) => {
            let ok = r.abs() <= cfg.identity_tol;
            rec.report.identity.record(ok);
            rec.report.max_identity_residual = rec.report.max_identity_residual.max(r.abs().as_f64());
            if !ok {
                rec.fail("identity", label(), format!("residual {:e}", r.as_f64()));
            }
        }
        Err(e) => {
            rec.report.identity.record(false);
            rec.fail("identity", label(), e.to_string());
        }
    }

    // equivalent forms
    let forms = tau(f, w, params, q).and_then(|t| {
        Ok((t.value, tau_combination(f, w, params, q)?, tau_decomposed(f, w, params, q)?))
    });
    match forms {
        Ok((t, comb, dec)) => {
            let gap = (t - comb).abs().max((t - dec).abs());
            let ok = gap <= cfg.equivalence_tol;
            rec.report.equivalences.record(ok);
            rec.report.max_equivalence_gap = rec.report.max_equivalence_gap.max(gap.as_f64());
            if !ok {
                rec.fail("equivalences", label(), format!("gap {:e}", gap.as_f64()));
            }
        }
        Err(e) => {
            rec.report.equivalences.record(false);
            rec.fail("equivalences", label(), e.to_string());
        }
    }

    // soundness, one check per exponent
    for &p in &EXPONENTS {
        match bound_set(f, w, params, T::lit(p), q) {
            Ok(set) => {
                let ok = set.is_sound(cfg.soundness_rel_tol);
                rec.report.soundness.record(ok);
                let worst = set.ratios.exact.as_array().iter().fold(T::zero(), |m, &r| m.max(r));
                rec.report.max_exact_ratio = rec.report.max_exact_ratio.max(worst.as_f64());
                if !ok {
                    rec.fail(
                        "soundness",
                        format!("{} p={p}", label()),
                        format!("|tau| {:e} vs exact {:?}", set.deviation.as_f64(), set.exact.as_array()),
                    );
                }
                rec.report.paper_violations.record(set.paper_is_sound(cfg.soundness_rel_tol));
            }
            Err(e) => {
                rec.report.soundness.record(false);
                rec.fail("soundness", format!("{} p={p}", label()), e.to_string());
            }
        }
    }
}

fn check_reductions<T: Scalar>(cfg: &VerifyConfig<T>, rec: &mut Recorder<'_>) {
    let (a, b) = (T::zero(), T::one());
    let uniform = match Weight::uniform(a, b) {
        Ok(w) => w,
        Err(e) => {
            rec.report.reductions.record(false);
            rec.fail("reductions", "uniform weight".into(), e.to_string());
            return;
        }
    };
    let tol = cfg.reduction_tol;
    let q = &cfg.quad;
    let norms = NormTriple::new(T::one(), T::one(), T::one(), T::lit(2.0));

    for &x in &REDUCTION_X {
        let x = T::lit(x);
        for &(alpha, beta) in &REDUCTION_COEFFICIENTS {
            let label = format!("x={x} alpha={alpha} beta={beta}");
            let outcome = TauParams::new(a, b, x, T::lit(alpha), T::lit(beta)).and_then(|p| {
                let paper = bounds_paper(&p, &uniform, &norms, q)?;
                let cerone = bounds_cerone(x, p.alpha, p.beta, a, b, &norms)?;
                Ok((paper, cerone))
            });
            match outcome {
                Ok((paper, cerone)) => {
                    let ok = paper
                        .as_array()
                        .iter()
                        .zip(cerone.as_array())
                        .all(|(&u, v)| rel_close(u, v, tol));
                    rec.report.reductions.record(ok);
                    if !ok {
                        rec.fail(
                            "reductions",
                            format!("uniform weight vs two-mean bound, {label}"),
                            format!("{:?} vs {:?}", paper.as_array(), cerone.as_array()),
                        );
                    }
                }
                Err(e) => {
                    rec.report.reductions.record(false);
                    rec.fail("reductions", label, e.to_string());
                }
            }
        }
        // Montgomery inf-branch equals Ostrowski's bound at every point.
        match (bounds_dragomir(x, a, b, &norms), bound_ostrowski(x, a, b, T::one())) {
            (Ok(d), Ok(o)) => {
                let ok = rel_close(d.inf, o, tol);
                rec.report.reductions.record(ok);
                if !ok {
                    rec.fail("reductions", format!("Ostrowski x={x}"), format!("{:e} vs {:e}", d.inf.as_f64(), o.as_f64()));
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                rec.report.reductions.record(false);
                rec.fail("reductions", format!("Ostrowski x={x}"), e.to_string());
            }
        }
        // Informational: equal coefficients against the Montgomery bound.
        if let (Ok(p), Ok(d)) = (TauParams::new(a, b, x, T::one(), T::one()), bounds_dragomir(x, a, b, &norms)) {
            if let Ok(e) = bounds_paper(&p, &uniform, &norms, q) {
                rec.report.midpoint_comparison.record(rel_close(e.inf, d.inf, tol));
            }
        }
    }

    // Midpoint agreement of the specialised bound with the Montgomery bound,
    // and tau with beta = 0 at x = b against S(f; a, b), for every function.
    let mid = (a + b) * T::lit(0.5);
    for name in crate::corpus::CORPUS_FUNCTIONS {
        let Some(f) = crate::corpus::registry_function::<T>(name) else {
            continue;
        };
        let outcome = (|| {
            let c = corollary_bounds(CorollaryMode::MidpointEqual, &f, &uniform, T::lit(2.0), q)?;
            let n = derivative_norms(&f, T::lit(2.0), a, b, q)?;
            let d = bounds_dragomir(mid, a, b, &n)?;
            let t = tau(&f, &uniform, &TauParams::new(a, b, b, T::one(), T::zero())?, q)?.value;
            let s = deviation_s(&f, &uniform, b, a, b, q)?;
            Ok::<_, crate::error::Error>((c.bounds.inf, d.inf, t, s))
        })();
        match outcome {
            Ok((c, d, t, s)) => {
                let ok = rel_close(c, d, tol);
                rec.report.reductions.record(ok);
                if !ok {
                    rec.fail("reductions", format!("midpoint f={name}"), format!("{:e} vs {:e}", c.as_f64(), d.as_f64()));
                }
                let ok = (t - s).abs() <= cfg.equivalence_tol;
                rec.report.reductions.record(ok);
                if !ok {
                    rec.fail("reductions", format!("endpoint f={name}"), format!("{:e} vs {:e}", t.as_f64(), s.as_f64()));
                }
            }
            Err(e) => {
                rec.report.reductions.record(false);
                rec.fail("reductions", format!("f={name}"), e.to_string());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_passes() {
        let corpus = Corpus::<f64>::small().unwrap();
        let report = run_verify(&corpus, &VerifyConfig::default()).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.cases, 180);
        assert!(report.to_string().starts_with("identity: 0 failures, soundness: 0 failures, reductions: 0 failures"));
    }

    #[test]
    fn uniform_only_corpus_has_sound_closed_forms() {
        let corpus = Corpus::<f64>::small().unwrap().restrict_weights(&["uniform"]);
        let report = run_verify(&corpus, &VerifyConfig::default()).unwrap();
        assert_eq!(report.paper_violations.failures, 0);
        assert!(report.paper_violations.checks > 0);
    }
}
