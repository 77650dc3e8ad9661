//! One function per command. Each builds its report in memory and hands the
//! bytes back to `main` for writing.

use std::fmt::Write as _;

use serde::Serialize;

use obw_core::bounds::{audit_paper_vs_exact, bound_set, sharpness_search, SharpnessKind};
use obw_core::cdf::{cdf_report, DensityModel};
use obw_core::corpus::{corpus_density, resolve_function, Corpus};
use obw_core::expr::parse;
use obw_core::kernel::TauParams;
use obw_core::quad::QuadConfig;
use obw_core::report::{fmt_sci, write_audit_csv, write_bounds_csv, write_cdf_csv, write_sharpness_csv, BoundsRow};
use obw_core::verify::{run_verify, VerifyConfig};
use obw_core::weights::{builtin_weight, Weight, WeightSpec};

use crate::config::{CommandName, CorpusSize, Format, Kind, NormChoice, RunConfig, WeightChoice};
use crate::error::CliError;

/// Report bytes plus whether the run passed (only `verify` can fail here).
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub passed: bool,
    /// One-line summary for standard error, if any.
    pub note: Option<String>,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            passed: true,
            note: None,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        CommandName::Bounds => run_bounds(cfg),
        CommandName::Verify => run_verify_cmd(cfg),
        CommandName::Audit => run_audit(cfg),
        CommandName::Sharpness => run_sharpness(cfg),
        CommandName::Cdf => run_cdf(cfg),
    }
}

fn quad(cfg: &RunConfig) -> Result<QuadConfig<f64>, CliError> {
    QuadConfig::new(cfg.tol, 0.0, cfg.max_subdiv).map_err(|e| CliError::Usage(e.to_string()))
}

fn build_weight(choice: &WeightChoice, a: f64, b: f64) -> Result<Weight<f64>, CliError> {
    match choice {
        WeightChoice::Spec(s) => {
            let spec: WeightSpec = s.parse().map_err(|e: obw_core::Error| CliError::Usage(format!("--weight {s}: {e}")))?;
            builtin_weight(&spec, a, b).map_err(|e| match e {
                obw_core::Error::UnknownWeight(_) | obw_core::Error::InvalidParameter { .. } => {
                    CliError::Usage(format!("--weight {s}: {e}"))
                }
                other => CliError::Compute {
                    context: format!("weight {s}"),
                    source: other,
                },
            })
        }
        WeightChoice::Expr(src) => {
            let e = parse(src).map_err(|e| CliError::Usage(format!("--weight-expr {src}: {e}")))?;
            let label = e.to_string();
            Weight::from_fn(label, a, b, move |t| e.eval(t)).map_err(CliError::compute(format!("weight {src}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> obw_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

fn run_bounds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let q = quad(cfg)?;
    let src = cfg.function.as_deref().expect("validated");
    let f = resolve_function::<f64>(src).map_err(|e| CliError::Usage(format!("--function {src}: {e}")))?;
    let w = build_weight(&cfg.weights[0], cfg.a, cfg.b)?;
    let mut rows = Vec::new();
    for &x in &cfg.xs {
        for &(alpha, beta) in &cfg.coefficients {
            let context = format!("bounds at x={x}, alpha={alpha}, beta={beta}");
            let params = TauParams::new(cfg.a, cfg.b, x, alpha, beta).map_err(|e| CliError::Usage(format!("{context}: {e}")))?;
            let set = bound_set(&f, &w, &params, cfg.p, &q).map_err(CliError::compute(context))?;
            rows.push(BoundsRow {
                function: f.label().to_string(),
                weight_name: w.name().to_string(),
                params,
                set,
            });
        }
    }
    let bytes = match cfg.format {
        Format::Csv => csv_bytes(|buf| write_bounds_csv(&rows, buf))?,
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'r> {
                function: &'r str,
                weight_name: &'r str,
                params: &'r TauParams<f64>,
                #[serde(flatten)]
                set: &'r obw_core::bounds::BoundSet<f64>,
            }
            let out: Vec<Row> = rows
                .iter()
                .map(|r| Row {
                    function: &r.function,
                    weight_name: &r.weight_name,
                    params: &r.params,
                    set: &r.set,
                })
                .collect();
            to_json(&out)?
        }
        Format::Text => {
            let mut s = String::new();
            for (i, r) in rows.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                bounds_text(&mut s, r, cfg.norm);
            }
            s.into_bytes()
        }
    };
    Ok(Outcome::ok(bytes))
}

fn bounds_text(s: &mut String, r: &BoundsRow<f64>, norm: Option<NormChoice>) {
    let set = &r.set;
    let p = &r.params;
    let _ = writeln!(s, "function {}", r.function);
    let _ = writeln!(s, "weight {}", r.weight_name);
    let _ = writeln!(
        s,
        "x {} alpha {} beta {} p {}",
        fmt_sci(p.x),
        fmt_sci(p.alpha),
        fmt_sci(p.beta),
        fmt_sci(set.norms.exponent)
    );
    let _ = writeln!(s, "tau {}", fmt_sci(set.tau));
    let _ = writeln!(
        s,
        "norm_inf {} norm_p {} norm_one {}",
        fmt_sci(set.norms.inf),
        fmt_sci(set.norms.p),
        fmt_sci(set.norms.one)
    );
    for (name, t) in [
        ("paper", set.paper),
        ("exact", set.exact),
        ("ratio_paper", set.ratios.paper),
        ("ratio_exact", set.ratios.exact),
    ] {
        let _ = writeln!(
            s,
            "{name}_inf {} {name}_p {} {name}_one {}",
            fmt_sci(t.inf),
            fmt_sci(t.p),
            fmt_sci(t.one)
        );
    }
    if let Some(norm) = norm {
        let pick = |t: obw_core::BoundTriple| match norm {
            NormChoice::Inf => t.inf,
            NormChoice::P => t.p,
            NormChoice::One => t.one,
        };
        let name = match norm {
            NormChoice::Inf => "inf",
            NormChoice::P => "p",
            NormChoice::One => "one",
        };
        let _ = writeln!(
            s,
            "selected {name} paper {} exact {}",
            fmt_sci(pick(set.paper)),
            fmt_sci(pick(set.exact))
        );
    }
}

fn run_verify_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let q = quad(cfg)?;
    let corpus = match cfg.corpus {
        CorpusSize::Small => Corpus::small(),
        CorpusSize::Full => Corpus::full(),
    }
    .map_err(CliError::compute("corpus"))?;
    let corpus = if cfg.weights.is_empty() {
        corpus
    } else {
        let names: Vec<&str> = cfg
            .weights
            .iter()
            .filter_map(|w| match w {
                WeightChoice::Spec(s) => Some(s.as_str()),
                WeightChoice::Expr(_) => None,
            })
            .collect();
        if let Some(bad) = names.iter().find(|n| !corpus.weights.iter().any(|w| w.name() == **n)) {
            return Err(CliError::Usage(format!(
                "--weights: `{bad}` is not a corpus weight (uniform, increasing, decreasing, exponential, arcsine)"
            )));
        }
        corpus.restrict_weights(&names)
    };
    let vcfg = VerifyConfig {
        quad: q,
        ..VerifyConfig::default()
    };
    let report = run_verify(&corpus, &vcfg).map_err(CliError::compute("verify"))?;
    let bytes = match cfg.format {
        Format::Json => to_json(&report)?,
        Format::Text | Format::Csv => report.to_string().into_bytes(),
    };
    Ok(Outcome {
        bytes,
        passed: report.passed(),
        note: None,
    })
}

fn run_audit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let q = quad(cfg)?;
    let weights = cfg
        .weights
        .iter()
        .map(|w| build_weight(w, cfg.a, cfg.b))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = audit_paper_vs_exact(&weights, &cfg.xs, &cfg.coefficients, &q).map_err(CliError::compute("audit"))?;
    let flagged = rows.iter().filter(|r| r.flagged).count();
    let bytes = match cfg.format {
        Format::Csv => csv_bytes(|buf| write_audit_csv(&rows, buf))?,
        Format::Json => to_json(&rows)?,
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{} x {} alpha {} beta {} paper {} exact {} ratio {}{}",
                    r.weight_name,
                    fmt_sci(r.x),
                    fmt_sci(r.alpha),
                    fmt_sci(r.beta),
                    fmt_sci(r.paper_inf_factor),
                    fmt_sci(r.exact_inf_factor),
                    fmt_sci(r.ratio),
                    if r.flagged { " FLAGGED" } else { "" }
                );
            }
            s.into_bytes()
        }
    };
    Ok(Outcome {
        bytes,
        passed: true,
        note: Some(format!("{flagged} of {} rows flagged", rows.len())),
    })
}

fn run_sharpness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let q = quad(cfg)?;
    let w = build_weight(&cfg.weights[0], cfg.a, cfg.b)?;
    let kind = match cfg.kind {
        Kind::Inf => SharpnessKind::ExactInf,
        Kind::One => SharpnessKind::ExactOne,
    };
    let report = sharpness_search(&w, &cfg.xs, &cfg.coefficients, kind, &q).map_err(CliError::compute("sharpness"))?;
    let note = report.best.map(|b| {
        format!(
            "best ratio {} at x {} alpha {} beta {}",
            fmt_sci(b.ratio),
            fmt_sci(b.x),
            fmt_sci(b.alpha),
            fmt_sci(b.beta)
        )
    });
    let bytes = match cfg.format {
        Format::Csv => csv_bytes(|buf| write_sharpness_csv(std::slice::from_ref(&report), buf))?,
        Format::Json => to_json(&report)?,
        Format::Text => {
            let mut s = String::new();
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "x {} alpha {} beta {} deviation {} bound {} ratio {}",
                    fmt_sci(r.x),
                    fmt_sci(r.alpha),
                    fmt_sci(r.beta),
                    fmt_sci(r.deviation),
                    fmt_sci(r.bound),
                    fmt_sci(r.ratio)
                );
            }
            if let Some(n) = &note {
                let _ = writeln!(s, "{n}");
            }
            s.into_bytes()
        }
    };
    Ok(Outcome {
        bytes,
        passed: true,
        note,
    })
}

fn run_cdf(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let q = quad(cfg)?;
    if cfg.coefficients.len() != 1 {
        return Err(CliError::Usage("cdf takes a single coefficient pair (--alpha/--beta)".into()));
    }
    let (alpha, beta) = cfg.coefficients[0];
    let src = cfg.density.as_deref().expect("validated");
    let density = match corpus_density::<f64>(src) {
        Some(d) if (cfg.a, cfg.b) == (0.0, 1.0) => d,
        _ => parse(src)
            .map_err(|e| CliError::Usage(format!("--density {src}: {e}")))?
            .to_fn1d(),
    };
    let w = build_weight(&cfg.weights[0], cfg.a, cfg.b)?;
    let model = if cfg.normalize {
        DensityModel::normalized(density, w, &q)
    } else {
        DensityModel::new(density, w, &q)
    }
    .map_err(|e| match e {
        obw_core::Error::DensityMass { .. } => CliError::Usage(format!("--density {src}: {e} (pass --normalize to rescale)")),
        other => CliError::Compute {
            context: format!("density {src}"),
            source: other,
        },
    })?;
    let rows = cdf_report(&model, &cfg.xs, alpha, beta, cfg.p, cfg.fw_norms, &q).map_err(CliError::compute("cdf"))?;
    let bytes = match cfg.format {
        Format::Csv => csv_bytes(|buf| write_cdf_csv(&rows, buf))?,
        Format::Json => to_json(&rows)?,
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "x {} F_w {} R_w {} lhs {} bound_inf {} bound_p {} bound_one {} residual {}",
                    fmt_sci(r.x),
                    fmt_sci(r.cdf),
                    fmt_sci(r.reliability),
                    fmt_sci(r.lhs),
                    fmt_sci(r.bound_inf),
                    fmt_sci(r.bound_p),
                    fmt_sci(r.bound_one),
                    fmt_sci(r.identity_residual)
                );
            }
            s.into_bytes()
        }
    };
    Ok(Outcome::ok(bytes))
}
