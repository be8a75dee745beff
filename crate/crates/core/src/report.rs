//! Reliability diagrams (SVG) and summary tables (JSON/CSV).

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{AggregateSummary, EceReport, METHOD_SCALED};

/// Series colours, cycled.
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarkerShape {
    Circle,
    Square,
    Diamond,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesStyle {
    pub color: String,
    pub marker: MarkerShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub report: EceReport,
    pub style: SeriesStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    pub series: Vec<Series>,
}

impl DiagramSpec {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: "Confidence".into(),
            y_label: "Accuracy".into(),
            width: 640,
            height: 520,
            series: Vec::new(),
        }
    }

    /// Adds a series with the next palette colour and marker.
    pub fn push(&mut self, label: impl Into<String>, report: EceReport) {
        let i = self.series.len();
        let marker = [
            MarkerShape::Circle,
            MarkerShape::Square,
            MarkerShape::Diamond,
        ][i % 3];
        self.series.push(Series {
            label: label.into(),
            report,
            style: SeriesStyle {
                color: PALETTE[i % PALETTE.len()].into(),
                marker,
            },
        });
    }

    pub fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::InvalidArgument(
                "diagram needs at least one series".into(),
            ));
        }
        for (i, s) in self.series.iter().enumerate() {
            if self.series[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate series label `{}`",
                    s.label
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Plot {
    left: f64,
    top: f64,
    size_x: f64,
    size_y: f64,
}

impl Plot {
    fn x(&self, v: f64) -> f64 {
        self.left + v.clamp(0.0, 1.0) * self.size_x
    }

    fn y(&self, v: f64) -> f64 {
        self.top + (1.0 - v.clamp(0.0, 1.0)) * self.size_y
    }
}

fn marker(out: &mut String, shape: MarkerShape, x: f64, y: f64, color: &str, title: &str) {
    let r = 4.5;
    match shape {
        MarkerShape::Circle => {
            let _ = write!(
                out,
                r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"><title>{title}</title></circle>"#
            );
        }
        MarkerShape::Square => {
            let _ = write!(
                out,
                r#"<rect class="marker" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"><title>{title}</title></rect>"#,
                x - r,
                y - r,
                2.0 * r,
                2.0 * r
            );
        }
        MarkerShape::Diamond => {
            let _ = write!(
                out,
                r#"<polygon class="marker" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"><title>{title}</title></polygon>"#,
                x,
                y - r,
                x + r,
                y,
                x,
                y + r,
                x - r,
                y
            );
        }
    }
    out.push('\n');
}

/// Renders a reliability diagram: the `x = y` reference line, one marker per
/// non-empty bin at (mean confidence, mean accuracy), and a vertical bar of
/// half-length `sqrt(acc_variance)` through each marker. Legend entries carry
/// each series' ECE.
pub fn reliability_svg(spec: &DiagramSpec) -> Result<String> {
    spec.validate()?;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let legend_h = 18.0 * spec.series.len() as f64;
    let plot = Plot {
        left: 64.0,
        top: 40.0,
        size_x: w - 64.0 - 24.0,
        size_y: h - 40.0 - 56.0 - legend_h,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        escape_xml(&spec.title)
    );

    // Axes, grid and ticks.
    let _ = writeln!(
        out,
        r##"<rect class="frame" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        plot.left, plot.top, plot.size_x, plot.size_y
    );
    for i in 0..=10 {
        let v = i as f64 / 10.0;
        let (gx, gy) = (plot.x(v), plot.y(v));
        let _ = writeln!(
            out,
            r##"<line class="grid" x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#eee"/>"##,
            plot.top,
            plot.top + plot.size_y
        );
        let _ = writeln!(
            out,
            r##"<line class="grid" x1="{:.2}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#eee"/>"##,
            plot.left,
            plot.left + plot.size_x
        );
        if i % 2 == 0 {
            let _ = writeln!(
                out,
                r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
                plot.top + plot.size_y + 16.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
                plot.left - 6.0,
                gy + 4.0
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        plot.left + plot.size_x / 2.0,
        plot.top + plot.size_y + 36.0,
        escape_xml(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        plot.top + plot.size_y / 2.0,
        plot.top + plot.size_y / 2.0,
        escape_xml(&spec.y_label)
    );

    let _ = writeln!(
        out,
        r##"<line class="reference" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="5,4"/>"##,
        plot.x(0.0),
        plot.y(0.0),
        plot.x(1.0),
        plot.y(1.0)
    );

    for s in &spec.series {
        let color = escape_xml(&s.style.color);
        let _ = writeln!(
            out,
            r#"<g class="series" data-label="{}">"#,
            escape_xml(&s.label)
        );
        let pts: Vec<String> = s
            .report
            .non_empty_bins()
            .map(|b| format!("{:.2},{:.2}", plot.x(b.mean_conf), plot.y(b.mean_acc)))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline class="curve" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
        for b in s.report.non_empty_bins() {
            let sd = b.acc_variance.max(0.0).sqrt();
            let (x, y) = (plot.x(b.mean_conf), plot.y(b.mean_acc));
            let _ = writeln!(
                out,
                r#"<line class="errorbar" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-width="1"/>"#,
                plot.y(b.mean_acc + sd),
                plot.y(b.mean_acc - sd)
            );
            let title = format!(
                "bin {} n={} conf={:.3} acc={:.3}",
                b.index, b.count, b.mean_conf, b.mean_acc
            );
            marker(&mut out, s.style.marker, x, y, &color, &title);
        }
        out.push_str("</g>\n");
    }

    let legend_top = plot.top + plot.size_y + 48.0;
    for (i, s) in spec.series.iter().enumerate() {
        let y = legend_top + 18.0 * i as f64;
        let color = escape_xml(&s.style.color);
        let _ = writeln!(
            out,
            r#"<g class="legend"><rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{color}"/><text x="{:.2}" y="{:.2}">{} (ECE = {:.4})</text></g>"#,
            plot.left,
            y - 10.0,
            plot.left + 18.0,
            y,
            escape_xml(&s.label),
            s.report.ece
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Histogram of per-ensemble accuracy in `bins` equal-width bins, drawn with
/// the same conventions as [`reliability_svg`].
pub fn accuracy_histogram_svg(title: &str, accuracies: &[f64], bins: usize) -> Result<String> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bin count must be >= 1".into()));
    }
    let mut counts = vec![0usize; bins];
    for &a in accuracies {
        counts[crate::metrics::bin_index(a.clamp(0.0, 1.0), bins)] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let (w, h) = (640.0, 400.0);
    let plot = Plot {
        left: 64.0,
        top: 40.0,
        size_x: w - 88.0,
        size_y: h - 96.0,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        escape_xml(title)
    );
    let bw = plot.size_x / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        let bh = c as f64 / max * plot.size_y;
        let _ = writeln!(
            out,
            r##"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white"><title>{c}</title></rect>"##,
            plot.left + i as f64 * bw,
            plot.top + plot.size_y - bh,
            bw,
            bh
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Accuracy</text>"#,
        plot.left + plot.size_x / 2.0,
        plot.top + plot.size_y + 36.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub mean_ece: f64,
    pub var_ece: f64,
    pub mean_t: Option<f64>,
    pub mean_c: Option<f64>,
    /// `100 · (ece − ece_scaled) / ece_scaled`, one decimal; negative means
    /// the method improves on the temperature-scaled baseline.
    pub pct_vs_scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub const CSV_HEADER: &str = "method,mean_ece,var_ece,mean_t,mean_c,pct_vs_scaled";

/// Percent change of `ece` relative to `scaled`, rounded to one decimal.
pub fn percent_change(ece: f64, scaled: f64) -> Option<f64> {
    if scaled == 0.0 {
        return None;
    }
    let pct = 100.0 * (ece - scaled) / scaled;
    let rounded = (pct * 10.0).round() / 10.0;
    // Avoid "-0.0" for exact ties.
    Some(if rounded == 0.0 { 0.0 } else { rounded })
}

/// Builds the summary table, ordering rows by `comparators` first and then
/// any remaining methods in their aggregate order.
pub fn summary_table(agg: &AggregateSummary, comparators: &[&str]) -> Result<SummaryTable> {
    let scaled = agg.method(METHOD_SCALED).ok_or_else(|| {
        Error::InvalidArgument(format!("aggregate lacks the `{METHOD_SCALED}` method"))
    })?;
    let mut order: Vec<usize> = comparators
        .iter()
        .filter_map(|name| agg.methods.iter().position(|m| m.method == *name))
        .collect();
    for i in 0..agg.methods.len() {
        if !order.contains(&i) {
            order.push(i);
        }
    }
    let mut notes = Vec::new();
    if scaled.mean_ece == 0.0 {
        notes.push(format!(
            "{METHOD_SCALED} mean ECE is 0; pct_vs_scaled is undefined and left null"
        ));
    }
    let rows = order
        .into_iter()
        .map(|i| {
            let m = &agg.methods[i];
            SummaryRow {
                method: m.method.clone(),
                mean_ece: m.mean_ece,
                var_ece: m.var_ece,
                mean_t: m.mean_t,
                mean_c: m.mean_c,
                pct_vs_scaled: percent_change(m.mean_ece, scaled.mean_ece),
            }
        })
        .collect();
    Ok(SummaryTable { rows, notes })
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SummaryTable {
    /// CSV with the fixed header; absent values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_text(&r.method),
                r.mean_ece,
                r.var_ece,
                csv_cell(r.mean_t),
                csv_cell(r.mean_c),
                csv_cell(r.pct_vs_scaled)
            );
        }
        out
    }

    pub fn row(&self, method: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}
