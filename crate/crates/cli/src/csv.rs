//! CSV writers: header row, `.` decimal point, 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use collres::oracle::ReportRow;
use collres::{RidgeKind, RidgeReport, Sample, SignalMatrix};

use crate::error::{CliError, Result};

pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Table of numeric rows under `header`.
pub fn table<'a>(header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| number(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `omega, s_i, s_ii, s_total`, every signal multiplied by `scale`.
pub fn line_scan(samples: &[Sample], scale: f64) -> String {
    let rows: Vec<[f64; 4]> =
        samples.iter().map(|s| [s.omega, s.s_i * scale, s.s_ii * scale, s.s_total * scale]).collect();
    table(&["omega", "s_i", "s_ii", "s_total"], rows.iter().map(|r| r.as_slice()))
}

/// Long format `omega, omega_p, value`, row by row.
pub fn map(m: &SignalMatrix<f64>, values: &[f64], scale: f64) -> String {
    let mut rows = Vec::with_capacity(values.len());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            rows.push([m.omega_axis[j], m.omega_p(i, j), values[i * m.cols() + j] * scale]);
        }
    }
    table(&["omega", "omega_p", "value"], rows.iter().map(|r| r.as_slice()))
}

pub fn kind_name(kind: RidgeKind) -> &'static str {
    match kind {
        RidgeKind::Horizontal => "horizontal",
        RidgeKind::Vertical => "vertical",
        RidgeKind::Diagonal => "diagonal",
        RidgeKind::Raman => "raman",
    }
}

/// `kind, intercept, strength`.
pub fn ridges(report: &RidgeReport<f64>) -> String {
    let mut out = String::from("kind,intercept,strength\n");
    for r in &report.ridges {
        writeln!(out, "{},{},{}", kind_name(r.kind), number(r.intercept), number(r.strength)).expect("string write");
    }
    out
}

pub fn oracle_report(rows: &[ReportRow]) -> String {
    let data: Vec<[f64; 7]> = rows
        .iter()
        .map(|r| [r.omega, r.omega_p, r.closed_form, r.quadrature, r.abs_diff, r.rel_diff, r.est_error])
        .collect();
    table(
        &["omega", "omega_p", "closed_form", "quadrature", "abs_diff", "rel_diff", "est_error"],
        data.iter().map(|r| r.as_slice()),
    )
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
