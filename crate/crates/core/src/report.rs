//! Deterministic CSV emission.
//!
//! Numbers are written with nine significant digits in scientific notation
//! with a signed, at least two-digit exponent (`-1.25000000e-01`), so output
//! is byte-stable across runs and platforms.

use std::io::Write;

use crate::bounds::{AuditRow, BoundSet, SharpnessReport};
use crate::cdf::CdfRow;
use crate::error::{Error, Result};
use crate::kernel::TauParams;
use crate::scalar::Scalar;

pub fn fmt_sci(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.8e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn num<T: Scalar>(v: T) -> String {
    fmt_sci(v.as_f64())
}

fn report_err(e: impl std::fmt::Display) -> Error {
    Error::Report(e.to_string())
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(report_err)?;
    for row in rows {
        w.write_record(&row).map_err(report_err)?;
    }
    w.flush().map_err(report_err)
}

pub const AUDIT_HEADER: [&str; 10] = [
    "weight_name",
    "x",
    "alpha",
    "beta",
    "paper_inf_factor",
    "exact_inf_factor",
    "ratio",
    "flagged",
    "witness_deviation",
    "witness_paper_bound",
];

/// Witness columns are empty for unflagged rows.
pub fn write_audit_csv<T: Scalar, W: Write>(rows: &[AuditRow<T>], out: W) -> Result<()> {
    write_table(
        out,
        &AUDIT_HEADER,
        rows.iter().map(|r| {
            let (dev, bound) = r
                .witness
                .map_or((String::new(), String::new()), |w| (num(w.deviation), num(w.paper_bound)));
            vec![
                r.weight_name.clone(),
                num(r.x),
                num(r.alpha),
                num(r.beta),
                num(r.paper_inf_factor),
                num(r.exact_inf_factor),
                num(r.ratio),
                r.flagged.to_string(),
                dev,
                bound,
            ]
        }),
    )
}

pub const CDF_HEADER: [&str; 8] = ["x", "F_w", "R_w", "lhs_31", "bound_inf", "bound_p", "bound_one", "identity_residual"];
pub const CDF_FW_HEADER: [&str; 3] = ["fw_norm_inf", "fw_norm_p", "fw_norm_one"];

/// The `fw_norm_*` columns appear only when the rows carry them.
pub fn write_cdf_csv<T: Scalar, W: Write>(rows: &[CdfRow<T>], out: W) -> Result<()> {
    let with_fw = rows.iter().any(|r| r.fw_norms.is_some());
    let mut header: Vec<&str> = CDF_HEADER.to_vec();
    if with_fw {
        header.extend_from_slice(&CDF_FW_HEADER);
    }
    write_table(
        out,
        &header,
        rows.iter().map(|r| {
            let mut row = vec![
                num(r.x),
                num(r.cdf),
                num(r.reliability),
                num(r.lhs),
                num(r.bound_inf),
                num(r.bound_p),
                num(r.bound_one),
                num(r.identity_residual),
            ];
            if let Some(n) = r.fw_norms {
                row.extend([num(n.inf), num(n.p), num(n.one)]);
            }
            row
        }),
    )
}

pub const SHARPNESS_HEADER: [&str; 8] = ["weight_name", "kind", "x", "alpha", "beta", "deviation", "bound", "ratio"];

pub fn write_sharpness_csv<T: Scalar, W: Write>(reports: &[SharpnessReport<T>], out: W) -> Result<()> {
    write_table(
        out,
        &SHARPNESS_HEADER,
        reports.iter().flat_map(|rep| {
            let kind = rep.kind.name().to_string();
            rep.rows.iter().map(move |r| {
                vec![
                    rep.weight_name.clone(),
                    kind.clone(),
                    num(r.x),
                    num(r.alpha),
                    num(r.beta),
                    num(r.deviation),
                    num(r.bound),
                    num(r.ratio),
                ]
            })
        }),
    )
}

pub const BOUNDS_HEADER: [&str; 22] = [
    "function",
    "weight_name",
    "x",
    "alpha",
    "beta",
    "p",
    "tau",
    "norm_inf",
    "norm_p",
    "norm_one",
    "paper_inf",
    "paper_p",
    "paper_one",
    "exact_inf",
    "exact_p",
    "exact_one",
    "ratio_paper_inf",
    "ratio_paper_p",
    "ratio_paper_one",
    "ratio_exact_inf",
    "ratio_exact_p",
    "ratio_exact_one",
];

/// One labelled bound evaluation.
#[derive(Debug, Clone)]
pub struct BoundsRow<T: Scalar> {
    pub function: String,
    pub weight_name: String,
    pub params: TauParams<T>,
    pub set: BoundSet<T>,
}

pub fn write_bounds_csv<T: Scalar, W: Write>(rows: &[BoundsRow<T>], out: W) -> Result<()> {
    write_table(
        out,
        &BOUNDS_HEADER,
        rows.iter().map(|r| {
            let s = &r.set;
            let mut row = vec![
                r.function.clone(),
                r.weight_name.clone(),
                num(r.params.x),
                num(r.params.alpha),
                num(r.params.beta),
                num(s.norms.exponent),
                num(s.tau),
                num(s.norms.inf),
                num(s.norms.p),
                num(s.norms.one),
            ];
            for triple in [s.paper, s.exact, s.ratios.paper, s.ratios.exact] {
                row.extend(triple.as_array().into_iter().map(num));
            }
            row
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format() {
        assert_eq!(fmt_sci(0.123456789), "1.23456789e-01");
        assert_eq!(fmt_sci(-0.125), "-1.25000000e-01");
        assert_eq!(fmt_sci(0.0), "0.00000000e+00");
        assert_eq!(fmt_sci(12345.0), "1.23450000e+04");
        assert_eq!(fmt_sci(1e-300), "1.00000000e-300");
        assert_eq!(fmt_sci(f64::INFINITY), "inf");
        assert_eq!(fmt_sci(f64::NAN), "NaN");
    }

    #[test]
    fn cdf_columns() {
        let row = CdfRow {
            x: 0.5,
            cdf: 0.25,
            reliability: 0.75,
            lhs: 0.0,
            bound_inf: 0.1,
            bound_p: 0.1,
            bound_one: 0.1,
            identity_residual: 0.0,
            fw_norms: None,
        };
        let mut buf = Vec::new();
        write_cdf_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,F_w,R_w,lhs_31,bound_inf,bound_p,bound_one,identity_residual");
        assert!(lines.next().unwrap().starts_with("5.00000000e-01,2.50000000e-01,7.50000000e-01,"));
    }
}
