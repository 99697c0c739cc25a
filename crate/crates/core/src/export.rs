//! CSV, JSON and SVG serialisations of the measurement types.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every CSV
//! parses back to bit-identical values.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

use crate::montecarlo::EstimateReport;
use crate::similarity::{HeatmapGrid, NeighborhoodProfile, SimilarityMatrix};
use crate::TOOL_VERSION;

pub const SIMILARITY_CSV_HEADER: &str = "rank_a,rank_b,score";
pub const HEATMAP_CSV_HEADER: &str = "bin_row,bin_col,mean_score,pair_count";
pub const PROFILE_CSV_HEADER: &str = "rank,count";
pub const ESTIMATE_CSV_HEADER: &str = "quantity,mean,stderr,ci_low,ci_high,trials,seed";

/// Top-level wrapper of every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub tool_version: &'static str,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub results: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(seed: Option<u64>, inputs: Value, results: T) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            seed,
            inputs,
            results,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn write_similarity_csv<W: Write>(sim: &SimilarityMatrix, mut out: W) -> io::Result<()> {
    writeln!(out, "{SIMILARITY_CSV_HEADER}")?;
    for &(a, b, score) in sim.entries() {
        writeln!(out, "{a},{b},{score}")?;
    }
    out.flush()
}

pub fn write_heatmap_csv<W: Write>(grid: &HeatmapGrid, mut out: W) -> io::Result<()> {
    writeln!(out, "{HEATMAP_CSV_HEADER}")?;
    for r in 0..grid.bins() {
        for c in 0..grid.bins() {
            let cell = grid.cell(r, c);
            writeln!(out, "{r},{c},{},{}", cell.mean_score, cell.pair_count)?;
        }
    }
    out.flush()
}

pub fn write_profile_csv<W: Write>(profile: &NeighborhoodProfile, mut out: W) -> io::Result<()> {
    writeln!(out, "{PROFILE_CSV_HEADER}")?;
    for (r, c) in profile.counts.iter().enumerate() {
        writeln!(out, "{},{c}", r + 1)?;
    }
    out.flush()
}

pub fn write_estimates_csv<W: Write>(reports: &[EstimateReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{ESTIMATE_CSV_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.quantity, r.mean, r.std_error, r.ci_low, r.ci_high, r.trials, r.seed
        )?;
    }
    out.flush()
}

/// Linear ramp from pale blue (minimum) to dark orange (maximum).
fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let lo = [222.0, 235.0, 247.0];
    let hi = [217.0, 72.0, 1.0];
    let c: Vec<u8> = lo
        .iter()
        .zip(hi.iter())
        .map(|(a, b)| (a + (b - a) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heatmap rendering with a min→max legend. Row 0 is drawn at the top, so the
/// most-popular block sits in the upper-left corner.
pub fn heatmap_svg(grid: &HeatmapGrid, title: &str) -> String {
    const PLOT: f64 = 600.0;
    const MARGIN: f64 = 60.0;
    const LEGEND: f64 = 90.0;
    let b = grid.bins();
    let cell = PLOT / b as f64;
    let (lo, hi) = grid.min_max_mean();
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    let width = MARGIN * 2.0 + PLOT + LEGEND;
    let height = MARGIN * 2.0 + PLOT;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, "<!-- {TOOL_VERSION} -->");
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN + PLOT / 2.0,
        xml_escape(title)
    );
    for r in 0..b {
        for c in 0..b {
            let v = grid.cell(r, c);
            let t = if span > 0.0 { (v.mean_score - lo) / span } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                MARGIN + c as f64 * cell,
                MARGIN + r as f64 * cell,
                cell,
                cell,
                ramp(t)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">rank bin (most popular left)</text>"#,
        MARGIN + PLOT / 2.0,
        MARGIN + PLOT + 30.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 {})">rank bin (most popular top)</text>"#,
        MARGIN + PLOT / 2.0,
        MARGIN + PLOT / 2.0
    );
    // Legend: vertical ramp, max at the top.
    let lx = MARGIN + PLOT + 20.0;
    let steps = 50;
    let step_h = PLOT / 2.0 / steps as f64;
    for k in 0..steps {
        let t = 1.0 - k as f64 / (steps - 1) as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{:.3}" width="20" height="{:.3}" fill="{}"/>"#,
            MARGIN + k as f64 * step_h,
            step_h + 0.5,
            ramp(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">max {hi:.4e}</text>"#,
        lx,
        MARGIN - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">min {lo:.4e}</text>"#,
        lx,
        MARGIN + PLOT / 2.0 + 16.0
    );
    s.push_str("</svg>\n");
    s
}

/// Log-log scatter of neighbourhood count against rank (zero counts omitted).
pub fn profile_svg(profile: &NeighborhoodProfile, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let points: Vec<(f64, f64)> = profile
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| (((r + 1) as f64).log10(), (c as f64).log10()))
        .collect();
    let x_max = (profile.counts.len().max(2) as f64).log10();
    let y_max = points.iter().map(|p| p.1).fold(0.0f64, f64::max).max(1.0);
    let px = |x: f64| M + x / x_max * (W - 2.0 * M);
    let py = |y: f64| H - M - y / y_max * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<!-- {TOOL_VERSION} -->");
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#, H - M);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">log10 rank ({})</text>"#,
        W / 2.0,
        H - 20.0,
        profile.axis
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {})">log10 neighbourhood size</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (x, y) in points {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="#1f77b4"/>"##,
            px(x),
            py(y)
        );
    }
    s.push_str("</svg>\n");
    s
}
