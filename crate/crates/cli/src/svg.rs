//! Standalone SVG plots: polylines for 1D scans and colour-mapped cells for
//! 2D maps. Axes are labelled in cm^-1.

use std::fmt::Write as _;

use crate::error::{CliError, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Linear map of `[lo, hi]` onto `[a, b]`; a degenerate range maps to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn header(out: &mut String) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .expect("string write");
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).expect("string write");
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1)
        .expect("string write");
    writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="start">{}</text>"#, y0 + 18.0, tick(x.0))
        .expect("string write");
    writeln!(out, r#"<text x="{x1}" y="{}" text-anchor="end">{}</text>"#, y0 + 18.0, tick(x.1)).expect("string write");
    writeln!(out, r#"<text x="{}" y="{y0}" text-anchor="end">{}</text>"#, x0 - 6.0, tick(y.0)).expect("string write");
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 6.0, y1 + 10.0, tick(y.1))
        .expect("string write");
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, 0.5 * (x0 + x1), HEIGHT - 15.0)
        .expect("string write");
    let ym = 0.5 * (y0 + y1);
    writeln!(out, r#"<text x="20" y="{ym}" text-anchor="middle" transform="rotate(-90 20 {ym})">{y_label}</text>"#)
        .expect("string write");
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.3e}")
    } else {
        format!("{v:.6}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Line plot of one or more series against a common x axis in cm^-1.
/// Non-finite points break the line.
pub fn line_plot(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    let xb = bounds(series.iter().flat_map(|s| s.x.iter().copied())).ok_or(CliError::EmptyPlot("line plot"))?;
    let yb = bounds(series.iter().flat_map(|s| s.y.iter().copied())).ok_or(CliError::EmptyPlot("line plot"))?;
    let mut out = String::new();
    header(&mut out);
    axes(&mut out, xb, yb, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, out: &mut String| {
            if run.len() >= 2 {
                writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                    run.join(" ")
                )
                .expect("string write");
            }
            run.clear();
        };
        for (&x, &y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                let px = scale(x, xb.0, xb.1, LEFT, WIDTH - RIGHT);
                let py = scale(y, yb.0, yb.1, HEIGHT - BOTTOM, TOP);
                run.push(format!("{px:.2},{py:.2}"));
            } else {
                flush(&mut run, &mut out);
            }
        }
        flush(&mut run, &mut out);
        writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            LEFT + 10.0,
            TOP + 16.0 * (k as f64 + 1.0),
            s.label
        )
        .expect("string write");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Diverging colour: blue for negative, white at zero, red for positive.
fn color(v: f64, max_abs: f64) -> String {
    if !v.is_finite() {
        return "#808080".into();
    }
    let t = if max_abs > 0.0 { (v / max_abs).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = (255.0 * (1.0 - t.abs())).round() as u8;
    if t >= 0.0 {
        format!("#ff{fade:02x}{fade:02x}")
    } else {
        format!("#{fade:02x}{fade:02x}ff")
    }
}

/// Heat map of `values` (row-major, one row per `y`) over the cell centres
/// `x` and `y`; the first row is drawn at the bottom.
pub fn heatmap(x: &[f64], y: &[f64], values: &[f64], x_label: &str, y_label: &str) -> Result<String> {
    if x.is_empty() || y.is_empty() || values.len() != x.len() * y.len() {
        return Err(CliError::EmptyPlot("heat map"));
    }
    let max_abs = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let xb = bounds(x.iter().copied()).ok_or(CliError::EmptyPlot("heat map"))?;
    let yb = bounds(y.iter().copied()).ok_or(CliError::EmptyPlot("heat map"))?;
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let (cw, chh) = (pw / x.len() as f64, ph / y.len() as f64);
    let mut out = String::new();
    header(&mut out);
    for i in 0..y.len() {
        let top = HEIGHT - BOTTOM - (i as f64 + 1.0) * chh;
        for j in 0..x.len() {
            let left = LEFT + j as f64 * cw;
            writeln!(
                out,
                r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cw + 0.05,
                chh + 0.05,
                color(values[i * x.len() + j], max_abs)
            )
            .expect("string write");
        }
    }
    axes(&mut out, xb, yb, x_label, y_label);
    out.push_str("</svg>\n");
    Ok(out)
}
