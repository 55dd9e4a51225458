//! CSV tables and SVG plots of sweep rows.

use std::fmt::Write as _;
use std::path::Path;

use super::{h_theory, ResultRow, SummaryRow};
use crate::error::{FracError, FracResult};

pub const CSV_HEADER: &str = "d,s,seed,boxdim_graph,corrdim_graph,H_theory,branch,j_lo,j_hi,residual";

/// C-style `%g`: six significant digits, trailing zeros dropped.
pub fn fmt_g(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    trim_zeros(&format!("{:.*}", (5 - exp) as usize, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_g(v: Option<f64>) -> String {
    v.map(fmt_g).unwrap_or_default()
}

fn opt_int(v: Option<u32>) -> String {
    v.map(|j| j.to_string()).unwrap_or_default()
}

/// Rows as CSV; missing values are empty fields.
pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_g(r.d),
            fmt_g(r.s),
            r.seed,
            opt_g(r.boxdim_graph),
            opt_g(r.corrdim_graph),
            opt_g(r.h_theory),
            r.branch.map(|b| b.label()).unwrap_or(""),
            opt_int(r.j_lo),
            opt_int(r.j_hi),
            opt_g(r.residual),
        );
    }
    out
}

pub fn summary_csv_string(rows: &[SummaryRow]) -> String {
    let mut out = String::from("d,s,count,boxdim_mean,boxdim_std,corrdim_mean,corrdim_std,H_theory\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_g(r.d),
            fmt_g(r.s),
            r.count,
            opt_g(r.boxdim_mean),
            opt_g(r.boxdim_std),
            opt_g(r.corrdim_mean),
            opt_g(r.corrdim_std),
            opt_g(r.h_theory),
        );
    }
    out
}

fn write_file(path: &Path, text: &str) -> FracResult<()> {
    std::fs::write(path, text).map_err(|e| FracError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> FracResult<()> {
    write_file(path, &csv_string(rows))
}

pub fn emit_summary_csv(rows: &[SummaryRow], path: &Path) -> FracResult<()> {
    write_file(path, &summary_csv_string(rows))
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Scatter of graph estimates against `s` with `H(d,·)` drawn for each `d`.
pub fn svg_string(rows: &[ResultRow]) -> String {
    let mut ds: Vec<f64> = rows.iter().map(|r| r.d).filter(|d| d.is_finite()).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    let top = rows
        .iter()
        .filter_map(|r| r.boxdim_graph)
        .chain(ds.iter().map(|d| d + 1.0))
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max);
    let y_max = (top * 2.0).ceil() / 2.0;
    let px = |s: f64| MARGIN + s * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - v / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="800" height="600" fill="white"/>"#);
    let (x0, y0, x1, y1) = (px(0.0), py(0.0), px(1.0), py(y_max));
    let _ = writeln!(out, r#"<path d="M{x0:.2} {y1:.2} V{y0:.2} H{x1:.2}" stroke="black" fill="none"/>"#);
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let x = px(s);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 20.0, fmt_g(s));
    }
    let ticks = (y_max * 2.0).round() as usize;
    for k in 0..=ticks {
        let v = k as f64 / 2.0;
        let y = py(v);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, fmt_g(v));
    }
    let _ = writeln!(out, r#"<text x="400" y="{:.2}" text-anchor="middle">s</text>"#, HEIGHT - 20.0);
    let _ = writeln!(
        out,
        r#"<text x="20" y="300" text-anchor="middle" transform="rotate(-90 20 300)">graph box dimension</text>"#
    );
    for (i, &d) in ds.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = (1..=100)
            .filter_map(|k| {
                let s = k as f64 / 100.0;
                h_theory(d, s).ok().map(|(h, _)| format!("{:.2},{:.2}", px(s), py(h.min(y_max))))
            })
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{color}" fill="none"/>"#, pts.join(" "));
        for r in rows.iter().filter(|r| r.d == d) {
            if let Some(v) = r.boxdim_graph {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(r.s), py(v));
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">d = {}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 16.0 * i as f64,
            fmt_g(d)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(rows: &[ResultRow], path: &Path) -> FracResult<()> {
    write_file(path, &svg_string(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        let cases = [
            (1.5, "1.5"),
            (0.0, "0"),
            (100000.0, "100000"),
            (1e6, "1e+06"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (0.2777777777777778, "0.277778"),
            (-2.5, "-2.5"),
            (999999.5, "1e+06"),
            (0.6309297535714574, "0.63093"),
            (f64::NAN, "nan"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_g(v), want, "{v}");
        }
    }

    #[test]
    fn empty_rows_give_header() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn svg_is_self_contained() {
        let svg = svg_string(&[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        assert!(!svg.contains("href"));
    }
}
