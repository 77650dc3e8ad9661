//! Command-line flags, the optional JSON config file, and their merge into a
//! validated [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use obw_core::weights::split_spec_list;

use crate::error::CliError;

pub const TOL_ENV: &str = "OBW_TOL";

#[derive(Debug, Parser)]
#[command(name = "obw", version, about = "Weighted Ostrowski-type bounds: evaluation, verification and audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate tau and every bound for one function, weight and point grid.
    Bounds(Flags),
    /// Run the identity, soundness, equivalence and reduction suites.
    Verify(Flags),
    /// Compare the closed-form sup-norm factor with the kernel L1 norm.
    Audit(Flags),
    /// Evaluate extremal functions against the exact bounds.
    Sharpness(Flags),
    /// Distribution-function bounds for a density.
    Cdf(Flags),
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::Bounds(_) => CommandName::Bounds,
            Command::Verify(_) => CommandName::Verify,
            Command::Audit(_) => CommandName::Audit,
            Command::Sharpness(_) => CommandName::Sharpness,
            Command::Cdf(_) => CommandName::Cdf,
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Bounds(f) | Command::Verify(f) | Command::Audit(f) | Command::Sharpness(f) | Command::Cdf(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandName {
    Bounds,
    Verify,
    Audit,
    Sharpness,
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Sign of the kernel against `||rho||_1 ||f'||_inf`.
    Inf,
    /// Unit-mass spike against `sup|rho| ||f'||_1`.
    One,
}

/// Bound branch picked out by `--norm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    Inf,
    P,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusSize {
    Small,
    Full,
}

/// Flags shared by every command. Every value may also come from the config
/// file; flags win.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON file with any of these options as flat keys (flags override it).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Left end of the interval.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Right end of the interval.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Evaluation point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Number of equally spaced interior points a + (b-a) k / (N+1).
    #[arg(long = "x-grid")]
    pub x_grid: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Coefficient grid, e.g. "1:1,2:1,3:5".
    #[arg(long)]
    pub coefficients: Option<String>,
    /// Built-in weight, e.g. "uniform" or "exponential(lambda=2)".
    #[arg(long)]
    pub weight: Option<String>,
    /// Comma-separated list of built-in weights.
    #[arg(long)]
    pub weights: Option<String>,
    /// Weight given as an expression in t.
    #[arg(long = "weight-expr")]
    pub weight_expr: Option<String>,
    /// Registry name (linear, quadratic, cubic, quartic, sine, exponential, kink) or expression in t.
    #[arg(long)]
    pub function: Option<String>,
    /// Probability density: corpus name (uniform, linear, quadratic, bell) or expression in t.
    #[arg(long)]
    pub density: Option<String>,
    /// Rescale the density so its weighted mass is 1.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
    /// Highlight one bound branch in text output.
    #[arg(long, value_enum)]
    pub norm: Option<NormChoice>,
    /// Exponent p > 1 of the middle norm branch.
    #[arg(long)]
    pub p: Option<f64>,
    /// Absolute quadrature tolerance (overrides OBW_TOL).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Subdivision budget of the adaptive quadrature.
    #[arg(long = "max-subdiv")]
    pub max_subdiv: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Sharpness construction.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Verification corpus size.
    #[arg(long, value_enum)]
    pub corpus: Option<CorpusSize>,
    /// Add norms of f w to distribution-function reports.
    #[arg(long = "fw-norms", num_args = 0..=1, default_missing_value = "true")]
    pub fw_norms: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Flags {
    /// `self` with every value set in `top` replaced by it.
    pub fn overlaid_by(mut self, top: &Flags) -> Flags {
        overlay!(
            self, top, a, b, x, x_grid, alpha, beta, coefficients, weight, weights, weight_expr, function, density,
            normalize, norm, p, tol, max_subdiv, format, output, kind, corpus, fw_norms
        );
        self
    }
}

/// A single weight: built-in spec or expression.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightChoice {
    Spec(String),
    Expr(String),
}

/// Fully validated settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandName,
    pub a: f64,
    pub b: f64,
    pub xs: Vec<f64>,
    pub coefficients: Vec<(f64, f64)>,
    pub weights: Vec<WeightChoice>,
    pub function: Option<String>,
    pub density: Option<String>,
    pub normalize: bool,
    pub norm: Option<NormChoice>,
    pub p: f64,
    pub tol: f64,
    pub max_subdiv: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub kind: Kind,
    pub corpus: CorpusSize,
    pub fw_norms: bool,
}

pub const DEFAULT_AUDIT_WEIGHTS: &str = "uniform,increasing,decreasing,exponential,arcsine";
pub const DEFAULT_GRID: usize = 9;
pub const DEFAULT_SHARPNESS_COEFFICIENTS: [(f64, f64); 3] = [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)];

/// Interior grid `a + (b - a) k / (n + 1)`, `k = 1..=n`.
pub fn interior_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect()
}

fn parse_coefficients(s: &str, errors: &mut Vec<String>) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let parsed = item
            .split_once(':')
            .and_then(|(l, r)| Some((l.trim().parse::<f64>().ok()?, r.trim().parse::<f64>().ok()?)));
        match parsed {
            Some(pair) => out.push(pair),
            None => errors.push(format!("--coefficients: `{item}` is not of the form alpha:beta")),
        }
    }
    if out.is_empty() && errors.is_empty() {
        errors.push("--coefficients: empty list".into());
    }
    out
}

/// Reads the config file (if any), overlays the flags, applies defaults and
/// the environment, and validates everything, collecting all problems.
pub fn resolve(command: CommandName, flags: &Flags, env_tol: Option<String>) -> Result<RunConfig, CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            serde_json::from_str::<Flags>(&text)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?
        }
        None => Flags::default(),
    };
    let f = file.overlaid_by(flags);
    let mut errors = Vec::new();

    let a = f.a.unwrap_or(0.0);
    let b = f.b.unwrap_or(1.0);
    if !(a.is_finite() && b.is_finite() && a < b) {
        errors.push(format!("interval: need finite a < b, got a = {a}, b = {b}"));
    }

    let tol = match f.tol {
        Some(t) => Some(t),
        None => match env_tol {
            Some(s) => match s.trim().parse::<f64>() {
                Ok(t) => Some(t),
                Err(_) => {
                    errors.push(format!("{TOL_ENV}: `{s}` is not a number"));
                    None
                }
            },
            None => None,
        },
    }
    .unwrap_or(obw_core::quad::QuadConfig::<f64>::default().abs_tol);
    if !(tol.is_finite() && tol > 0.0) {
        errors.push(format!("tolerance must be positive and finite, got {tol}"));
    }
    let max_subdiv = f.max_subdiv.unwrap_or(obw_core::quad::QuadConfig::<f64>::default().max_subdivisions);
    if max_subdiv == 0 {
        errors.push("--max-subdiv must be at least 1".into());
    }

    let p = f.p.unwrap_or(2.0);
    if !(p.is_finite() && p > 1.0) {
        errors.push(format!("--p must be finite and > 1, got {p}"));
    }

    if f.x.is_some() && f.x_grid.is_some() {
        errors.push("--x and --x-grid are mutually exclusive".into());
    }
    if f.x_grid == Some(0) {
        errors.push("--x-grid must be at least 1".into());
    }
    let default_grid = matches!(command, CommandName::Audit | CommandName::Sharpness);
    let xs = match (f.x, f.x_grid) {
        (Some(x), _) => vec![x],
        (None, Some(n)) => interior_grid(a, b, n),
        (None, None) if default_grid => interior_grid(a, b, DEFAULT_GRID),
        (None, None) => {
            if command != CommandName::Verify {
                errors.push("missing --x (or --x-grid)".into());
            }
            Vec::new()
        }
    };
    for &x in &xs {
        if !(x >= a && x <= b) {
            errors.push(format!("--x {x} lies outside [{a}, {b}]"));
        }
    }

    if f.coefficients.is_some() && (f.alpha.is_some() || f.beta.is_some()) {
        errors.push("--coefficients cannot be combined with --alpha/--beta".into());
    }
    let coefficients = match (&f.coefficients, f.alpha, f.beta) {
        (Some(s), _, _) => parse_coefficients(s, &mut errors),
        (None, None, None) if command == CommandName::Sharpness => DEFAULT_SHARPNESS_COEFFICIENTS.to_vec(),
        (None, alpha, beta) => vec![(alpha.unwrap_or(1.0), beta.unwrap_or(1.0))],
    };
    for &(alpha, beta) in &coefficients {
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0) {
            errors.push(format!("coefficients must be nonnegative and not both zero, got ({alpha}, {beta})"));
        }
    }

    let given = [f.weight.is_some(), f.weights.is_some(), f.weight_expr.is_some()]
        .iter()
        .filter(|&&g| g)
        .count();
    if given > 1 {
        errors.push("use only one of --weight, --weights, --weight-expr".into());
    }
    let weights: Vec<WeightChoice> = if let Some(e) = &f.weight_expr {
        vec![WeightChoice::Expr(e.clone())]
    } else if let Some(w) = &f.weight {
        vec![WeightChoice::Spec(w.clone())]
    } else if let Some(list) = &f.weights {
        split_spec_list(list).into_iter().map(WeightChoice::Spec).collect()
    } else {
        match command {
            CommandName::Audit => split_spec_list(DEFAULT_AUDIT_WEIGHTS).into_iter().map(WeightChoice::Spec).collect(),
            CommandName::Verify => Vec::new(),
            _ => vec![WeightChoice::Spec("uniform".into())],
        }
    };
    if weights.is_empty() && f.weights.is_some() {
        errors.push("--weights: empty list".into());
    }
    if weights.len() > 1 && matches!(command, CommandName::Bounds | CommandName::Cdf | CommandName::Sharpness) {
        errors.push("this command takes a single weight (--weight or --weight-expr)".into());
    }
    if command == CommandName::Verify && weights.iter().any(|w| matches!(w, WeightChoice::Expr(_))) {
        errors.push("verify restricts the corpus by name only (--weights)".into());
    }

    if command == CommandName::Bounds && f.function.is_none() {
        errors.push("missing --function".into());
    }
    if command == CommandName::Cdf && f.density.is_none() {
        errors.push("missing --density".into());
    }
    if command == CommandName::Verify && (f.a.is_some() || f.b.is_some()) {
        errors.push("verify runs on the fixed interval [0, 1]; drop --a/--b".into());
    }

    let format = f.format.unwrap_or(match command {
        CommandName::Bounds | CommandName::Verify => Format::Text,
        _ => Format::Csv,
    });

    if !errors.is_empty() {
        return Err(CliError::Usage(errors.join("; ")));
    }
    Ok(RunConfig {
        command,
        a,
        b,
        xs,
        coefficients,
        weights,
        function: f.function.clone(),
        density: f.density.clone(),
        normalize: f.normalize.unwrap_or(false),
        norm: f.norm,
        p,
        tol,
        max_subdiv,
        format,
        output: f.output.clone(),
        kind: f.kind.unwrap_or(Kind::Inf),
        corpus: f.corpus.unwrap_or(CorpusSize::Full),
        fw_norms: f.fw_norms.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_interior() {
        assert_eq!(interior_grid(0.0, 1.0, 1), vec![0.5]);
        let g = interior_grid(0.0, 2.0, 3);
        assert_eq!(g, vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn errors_are_aggregated() {
        let flags = Flags {
            p: Some(0.5),
            a: Some(2.0),
            ..Flags::default()
        };
        let Err(CliError::Usage(msg)) = resolve(CommandName::Bounds, &flags, None) else {
            panic!("expected usage error");
        };
        assert!(msg.contains("--p"));
        assert!(msg.contains("interval"));
        assert!(msg.contains("missing --x"));
        assert!(msg.contains("missing --function"));
    }

    #[test]
    fn tolerance_precedence() {
        let flags = Flags {
            x: Some(0.5),
            function: Some("t".into()),
            ..Flags::default()
        };
        let cfg = resolve(CommandName::Bounds, &flags, Some("1e-6".into())).unwrap();
        assert_eq!(cfg.tol, 1e-6);
        let flags = Flags { tol: Some(1e-7), ..flags };
        let cfg = resolve(CommandName::Bounds, &flags, Some("1e-6".into())).unwrap();
        assert_eq!(cfg.tol, 1e-7);
    }

    #[test]
    fn coefficient_grid_parsing() {
        let mut errs = Vec::new();
        assert_eq!(parse_coefficients("1:1, 3:5", &mut errs), vec![(1.0, 1.0), (3.0, 5.0)]);
        assert!(errs.is_empty());
        parse_coefficients("1-1", &mut errs);
        assert_eq!(errs.len(), 1);
    }
}
