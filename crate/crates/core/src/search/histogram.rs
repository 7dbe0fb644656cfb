use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: usize,
}

/// Equal-width bins over `[0, max(values)]`; the maximum lands in the last
/// bin. No values gives no bins.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let Some(max) = values.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let max = max.max(0.0);
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = if width > 0.0 {
            ((v.max(0.0) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            bin_lower: width * i as f64,
            bin_upper: if i + 1 == bins { max } else { width * (i + 1) as f64 },
            count,
        })
        .collect()
}

pub fn to_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", b.bin_lower, b.bin_upper, b.count);
    }
    out
}

/// Standalone SVG bar chart of the bins.
pub fn to_svg(bins: &[HistogramBin], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">relative gap (%)</text>"#,
        LEFT + plot_w / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">count</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let max_count = bins.iter().map(|b| b.count).max().unwrap_or(0);
    if !bins.is_empty() && max_count > 0 {
        let bar_w = plot_w / bins.len() as f64;
        for (i, b) in bins.iter().enumerate() {
            let h = plot_h * b.count as f64 / max_count as f64;
            let _ = writeln!(
                svg,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4a78b5" stroke="white"><title>[{}, {}): {}</title></rect>"##,
                LEFT + bar_w * i as f64,
                TOP + plot_h - h,
                bar_w,
                h,
                b.bin_lower,
                b.bin_upper,
                b.count
            );
        }
        let upper = bins.last().map_or(0.0, |b| b.bin_upper);
        for (x, label) in [(LEFT, 0.0), (LEFT + plot_w, upper)] {
            let _ = writeln!(
                svg,
                r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{label:.3}</text>"#,
                TOP + plot_h + 16.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{max_count}</text>"#,
            LEFT - 6.0,
            TOP + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramFormat {
    Csv,
    Svg,
}

impl HistogramFormat {
    /// Picks the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("svg") => HistogramFormat::Svg,
            _ => HistogramFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportOutcome {
    Written,
    /// No failures: headers only / empty chart.
    WrittenEmpty,
}

pub fn export_histogram(bins: &[HistogramBin], format: HistogramFormat, path: &Path) -> Result<ExportOutcome> {
    let body = match format {
        HistogramFormat::Csv => to_csv(bins),
        HistogramFormat::Svg => to_svg(bins, "Relative gap of the minimal Monge cost"),
    };
    std::fs::write(path, body)?;
    Ok(if bins.iter().all(|b| b.count == 0) {
        ExportOutcome::WrittenEmpty
    } else {
        ExportOutcome::Written
    })
}
