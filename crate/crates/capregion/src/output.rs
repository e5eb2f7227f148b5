//! CSV and SVG artifact writers.
//!
//! All files are written atomically (temp file in the target directory,
//! then rename) with LF line endings and fixed-precision scientific
//! notation, so identical inputs produce byte-identical artifacts. CSVs are
//! the machine-readable contract; SVG plots are presentation-only.
//!
//! Region schema: `curve,R1_bits,R2_bits,weight_theta,alloc_id` — rates in
//! bits per signaling period, `weight_theta` the boundary-weight angle in
//! radians, `alloc_id` the index of the point's allocation snapshot.
//! Sweep schema: `tau,sum_rate_bits,is_argmax`.
//! Convergence schema: `N,ray_deviation`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CapError, CapResult};
use crate::region::RateRegion;

pub const REGION_HEADER: &str = "curve,R1_bits,R2_bits,weight_theta,alloc_id";
pub const SWEEP_HEADER: &str = "tau,sum_rate_bits,is_argmax";
pub const CONVERGENCE_HEADER: &str = "N,ray_deviation";

fn out_err(path: &Path, reason: impl std::fmt::Display) -> CapError {
    CapError::OutputFailure {
        path: path.display().to_string(),
        reason: reason.to_string(),
    }
}

/// Writes `bytes` to `path` via a temp file and rename, creating parent
/// directories as needed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CapResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| out_err(path, e))?;
        }
    }
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| out_err(path, "path has no file name"))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp: PathBuf = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| out_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| out_err(path, e))?;
    Ok(())
}

/// Fixed-precision scientific notation (`precision` digits after the
/// point), the only float format used in CSV fields.
pub fn format_sci(x: f64, precision: usize) -> String {
    format!("{x:.precision$e}")
}

/// One region CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCsvRow {
    pub curve: String,
    pub r1: f64,
    pub r2: f64,
    pub weight_theta: f64,
    pub alloc_id: usize,
}

/// Coerces a curve label into something that cannot break the five-field
/// row layout: a comma inside the label would shift every later column.
fn safe_curve(curve: &str) -> String {
    curve.replace(',', ";")
}

/// Serializes a traced region under a curve label.
pub fn region_csv(curve: &str, region: &RateRegion, precision: usize) -> String {
    let curve = safe_curve(curve);
    let mut s = String::new();
    s.push_str(REGION_HEADER);
    s.push('\n');
    for (i, p) in region.points.iter().enumerate() {
        let theta = p.weight.1.atan2(p.weight.0);
        let _ = writeln!(
            s,
            "{curve},{},{},{},{i}",
            format_sci(p.r1, precision),
            format_sci(p.r2, precision),
            format_sci(theta, precision),
        );
    }
    s
}

pub fn write_region_csv(
    path: &Path,
    curve: &str,
    region: &RateRegion,
    precision: usize,
) -> CapResult<()> {
    write_atomic(path, region_csv(curve, region, precision).as_bytes())
}

/// Serializes explicit boundary points (used for reference operating points
/// that are not traced regions, e.g. a single-corner baseline).
pub fn points_csv(curve: &str, points: &[(f64, f64, f64)], precision: usize) -> String {
    let curve = safe_curve(curve);
    let mut s = String::new();
    s.push_str(REGION_HEADER);
    s.push('\n');
    for (i, &(r1, r2, theta)) in points.iter().enumerate() {
        let _ = writeln!(
            s,
            "{curve},{},{},{},{i}",
            format_sci(r1, precision),
            format_sci(r2, precision),
            format_sci(theta, precision),
        );
    }
    s
}

/// Parses a region CSV produced by [`region_csv`] / [`points_csv`].
pub fn read_region_csv(path: &Path) -> CapResult<Vec<RegionCsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| out_err(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == REGION_HEADER => {}
        other => {
            return Err(out_err(
                path,
                format!("bad region header: {:?}", other.unwrap_or("")),
            ));
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(out_err(path, format!("row {}: expected 5 fields", idx + 2)));
        }
        let parse = |s: &str| -> CapResult<f64> {
            s.parse::<f64>()
                .map_err(|_| out_err(path, format!("row {}: bad number `{s}`", idx + 2)))
        };
        rows.push(RegionCsvRow {
            curve: fields[0].to_string(),
            r1: parse(fields[1])?,
            r2: parse(fields[2])?,
            weight_theta: parse(fields[3])?,
            alloc_id: fields[4]
                .parse::<usize>()
                .map_err(|_| out_err(path, format!("row {}: bad alloc_id", idx + 2)))?,
        });
    }
    Ok(rows)
}

/// Serializes a delay sweep, flagging the (first) maximal sum rate.
pub fn sweep_csv(rows: &[(f64, f64)], precision: usize) -> String {
    let argmax = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap().then(b.0.cmp(&a.0)))
        .map(|(i, _)| i);
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for (i, &(tau, sum)) in rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{}",
            format_sci(tau, precision),
            format_sci(sum, precision),
            u8::from(Some(i) == argmax),
        );
    }
    s
}

pub fn write_sweep_csv(path: &Path, rows: &[(f64, f64)], precision: usize) -> CapResult<()> {
    write_atomic(path, sweep_csv(rows, precision).as_bytes())
}

/// Serializes a convergence study.
pub fn convergence_csv(rows: &[(usize, f64)], precision: usize) -> String {
    let mut s = String::new();
    s.push_str(CONVERGENCE_HEADER);
    s.push('\n');
    for &(n, dev) in rows {
        let _ = writeln!(s, "{n},{}", format_sci(dev, precision));
    }
    s
}

pub fn write_convergence_csv(
    path: &Path,
    rows: &[(usize, f64)],
    precision: usize,
) -> CapResult<()> {
    write_atomic(path, convergence_csv(rows, precision).as_bytes())
}

// --------------------------------------------------------------------------
// SVG plotting

/// One polyline of an overlay plot.
#[derive(Debug, Clone)]
pub struct SvgCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Anchor the axes at the origin (regions); otherwise fit the data.
    pub from_zero: bool,
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#17becf", "#bcbd22",
];

const W: f64 = 840.0;
const H: f64 = 600.0;
const ML: f64 = 72.0; // left margin
const MR: f64 = 24.0;
const MT: f64 = 48.0;
const MB: f64 = 56.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=5).map(|k| lo + (hi - lo) * k as f64 / 5.0).collect()
}

/// Renders an overlay plot of the given curves as an SVG document.
pub fn svg_overlay(curves: &[SvgCurve], opts: &PlotOptions) -> String {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for c in curves {
        for &(x, y) in &c.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if opts.from_zero {
        xmin = 0.0;
        ymin = 0.0;
    }
    if xmax - xmin < 1e-12 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymax = ymin + 1.0;
    }
    // A little headroom so curves do not touch the frame.
    let xpad = 0.04 * (xmax - xmin);
    let ypad = 0.04 * (ymax - ymin);
    xmax += xpad;
    ymax += ypad;
    if !opts.from_zero {
        xmin -= xpad;
        ymin -= ypad;
    }

    let px = |x: f64| ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" font-family="sans-serif" font-size="17" text-anchor="middle">{}</text>"#,
        (ML + W - MR) / 2.0,
        xml_escape(&opts.title)
    );

    // Axes frame.
    let _ = writeln!(
        s,
        r##"<rect x="{ML}" y="{MT}" width="{:.1}" height="{:.1}" fill="none" stroke="#444" stroke-width="1"/>"##,
        W - ML - MR,
        H - MT - MB
    );
    for t in nice_ticks(xmin, xmax) {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.1}" x2="{x:.2}" y2="{:.1}" stroke="#444" stroke-width="1"/>"##,
            H - MB,
            H - MB + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{t:.3}</text>"#,
            H - MB + 19.0
        );
    }
    for t in nice_ticks(ymin, ymax) {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.2}" x2="{ML}" y2="{y:.2}" stroke="#444" stroke-width="1"/>"##,
            ML - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{t:.3}</text>"#,
            ML - 9.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        (ML + W - MR) / 2.0,
        H - 12.0,
        xml_escape(&opts.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        xml_escape(&opts.y_label)
    );

    // Curves.
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if c.points.len() == 1 {
            let (x, y) = c.points[0];
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        } else {
            let mut d = String::new();
            for (k, &(x, y)) in c.points.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2}",
                    if k == 0 { "M" } else { " L" },
                    px(x),
                    py(y)
                );
            }
            let _ = writeln!(
                s,
                r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.8"/>"#
            );
        }
    }

    // Legend, top-right inside the frame.
    let lx = W - MR - 250.0;
    let mut ly = MT + 16.0;
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2.5"/>"#,
            lx + 26.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            xml_escape(&c.label)
        );
        ly += 17.0;
    }

    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, curves: &[SvgCurve], opts: &PlotOptions) -> CapResult<()> {
    write_atomic(path, svg_overlay(curves, opts).as_bytes())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

// ---------------------------------------------------------------------------
