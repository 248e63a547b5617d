//! Minimal self-contained SVG charts: line plots, heatmaps and two-colour
//! scatters on a fixed 960x600 canvas.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 600.0;

const LEFT: f64 = 90.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

const PALETTE: [&str; 6] = ["#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"];
const GREEN: &str = "#2ca02c";
const RED: &str = "#d62728";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Lines,
    SurfaceHeatmap,
    Scatter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub title: String,
    /// Axis captions including units, e.g. `time t [years]`.
    pub x: String,
    pub y: String,
}

impl Labels {
    pub fn new(title: impl Into<String>, x: impl Into<String>, y: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x: x.into(),
            y: y.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Values on a rectilinear grid; `values[row][col]` sits at `(x[col], y[row])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Colour-bar caption including units.
    pub value_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    Lines {
        labels: Labels,
        series: Vec<Series>,
    },
    SurfaceHeatmap {
        labels: Labels,
        grid: Grid,
    },
    Scatter {
        labels: Labels,
        markers: Vec<Marker>,
        /// Legend captions for the good and the bad markers.
        legend: (String, String),
    },
}

impl Plot {
    pub fn kind(&self) -> PlotKind {
        match self {
            Plot::Lines { .. } => PlotKind::Lines,
            Plot::SurfaceHeatmap { .. } => PlotKind::SurfaceHeatmap,
            Plot::Scatter { .. } => PlotKind::Scatter,
        }
    }
}

pub fn emit_plot_svg(plot: &Plot, path: &Path) -> Result<()> {
    super::write_text_file(path, &render_svg(plot)?)
}

pub fn render_svg(plot: &Plot) -> Result<String> {
    match plot {
        Plot::Lines { labels, series } => render_lines(labels, series),
        Plot::SurfaceHeatmap { labels, grid } => render_heatmap(labels, grid),
        Plot::Scatter {
            labels,
            markers,
            legend,
        } => render_scatter(labels, markers, legend),
    }
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Result<Range> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("cannot plot non-finite value {v}")));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            return Err(Error::InvalidArgument("nothing to plot".into()));
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            let pad = 0.05 * hi.abs().max(1.0);
            return Ok(Range {
                lo: lo - pad,
                hi: hi + pad,
            });
        }
        Ok(Range { lo, hi })
    }

    fn padded(self, fraction: f64) -> Range {
        let pad = fraction * (self.hi - self.lo);
        Range {
            lo: self.lo - pad,
            hi: self.hi + pad,
        }
    }

    fn ticks(self) -> (Vec<f64>, usize) {
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let decimals = (-step.log10().floor()).max(0.0) as usize;
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        ((first..=last).map(|k| k as f64 * step).collect(), decimals)
    }
}

struct Frame {
    x: Range,
    y: Range,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.lo) / (self.x.hi - self.x.lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.lo) / (self.y.hi - self.y.lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(out: &mut String, labels: &Labels) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="30" text-anchor="middle" font-size="17">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&labels.title)
    );
}

fn axes(out: &mut String, frame: &Frame, labels: &Labels) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let (xt, xd) = frame.x.ticks();
    for t in xt {
        let px = frame.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.1}" stroke="black"/><text x="{px:.2}" y="{:.1}" text-anchor="middle">{t:.xd$}</text>"#,
            y0 + 5.0,
            y0 + 20.0
        );
    }
    let (yt, yd) = frame.y.ticks();
    for t in yt {
        let py = frame.py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{t:.yd$}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 22.0,
        escape(&labels.x)
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{:.1}" text-anchor="middle" transform="rotate(-90 22 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&labels.y)
    );
}

fn legend_entry(out: &mut String, row: usize, swatch: &str, label: &str) {
    let x = WIDTH - RIGHT + 20.0;
    let y = TOP + 10.0 + 22.0 * row as f64;
    let _ = writeln!(
        out,
        r#"<g class="legend">{swatch}<text x="{:.1}" y="{:.1}">{}</text></g>"#,
        x + 30.0,
        y + 4.0,
        escape(label)
    );
}

fn line_swatch(row: usize, colour: &str) -> String {
    let x = WIDTH - RIGHT + 20.0;
    let y = TOP + 10.0 + 22.0 * row as f64;
    format!(
        r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{colour}" stroke-width="3"/>"#,
        x + 22.0
    )
}

fn dot_swatch(row: usize, colour: &str) -> String {
    let x = WIDTH - RIGHT + 31.0;
    let y = TOP + 10.0 + 22.0 * row as f64;
    format!(r#"<circle cx="{x:.1}" cy="{y:.1}" r="5" fill="{colour}"/>"#)
}

fn render_lines(labels: &Labels, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::InvalidArgument(
            "line plot needs at least one non-empty series".into(),
        ));
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let frame = Frame {
        x: Range::of(all().map(|p| p.0))?,
        y: Range::of(all().map(|p| p.1))?.padded(0.05),
    };
    let mut out = String::new();
    open(&mut out, labels);
    axes(&mut out, &frame, labels);
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut pts = String::with_capacity(16 * s.points.len());
        for (x, y) in &s.points {
            let _ = write!(pts, "{:.2},{:.2} ", frame.px(*x), frame.py(*y));
        }
        let _ = writeln!(
            out,
            r#"<polyline class="series" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            pts.trim_end()
        );
        legend_entry(&mut out, k, &line_swatch(k, colour), &s.label);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Blue to yellow ramp through teal and green.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |u: f64, v: f64| (u + f * (v - u)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn cell_edges(centres: &[f64]) -> Vec<f64> {
    if centres.len() == 1 {
        return vec![centres[0] - 0.5, centres[0] + 0.5];
    }
    let n = centres.len();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(centres[0] - 0.5 * (centres[1] - centres[0]));
    for w in centres.windows(2) {
        edges.push(0.5 * (w[0] + w[1]));
    }
    edges.push(centres[n - 1] + 0.5 * (centres[n - 1] - centres[n - 2]));
    edges
}

fn render_heatmap(labels: &Labels, grid: &Grid) -> Result<String> {
    if grid.x.is_empty() || grid.y.is_empty() || grid.values.is_empty() {
        return Err(Error::InvalidArgument("heatmap needs a non-empty grid".into()));
    }
    if grid.values.len() != grid.y.len() || grid.values.iter().any(|r| r.len() != grid.x.len()) {
        return Err(Error::InvalidArgument(
            "heatmap values do not match the grid axes".into(),
        ));
    }
    let xe = cell_edges(&grid.x);
    let ye = cell_edges(&grid.y);
    let frame = Frame {
        x: Range::of(xe.iter().copied())?,
        y: Range::of(ye.iter().copied())?,
    };
    let z = Range::of(grid.values.iter().flatten().copied())?;
    let mut out = String::new();
    open(&mut out, labels);
    for (r, row) in grid.values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let (x0, x1) = (frame.px(xe[c]), frame.px(xe[c + 1]));
            let (y0, y1) = (frame.py(ye[r + 1]), frame.py(ye[r]));
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x1 - x0,
                y1 - y0,
                ramp((v - z.lo) / (z.hi - z.lo))
            );
        }
    }
    axes(&mut out, &frame, labels);
    // colour bar
    let (bx, by, bh) = (WIDTH - RIGHT + 30.0, TOP + 30.0, HEIGHT - TOP - BOTTOM - 60.0);
    let steps = 40;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bx:.1}" y="{:.2}" width="24" height="{:.2}" fill="{}"/>"#,
            by + bh * (1.0 - (k + 1) as f64 / steps as f64),
            bh / steps as f64 + 0.5,
            ramp(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{bx:.1}" y="{by:.1}" width="24" height="{bh:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}">{}</text>"#,
        bx + 30.0,
        by + 5.0,
        super::csv::format_number(z.hi),
        bx + 30.0,
        by + bh + 5.0,
        super::csv::format_number(z.lo)
    );
    let _ = writeln!(
        out,
        r#"<text class="legend" x="{bx:.1}" y="{:.1}">{}</text>"#,
        by - 10.0,
        escape(&grid.value_label)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn render_scatter(labels: &Labels, markers: &[Marker], legend: &(String, String)) -> Result<String> {
    if markers.is_empty() {
        return Err(Error::InvalidArgument("scatter plot needs at least one point".into()));
    }
    let frame = Frame {
        x: Range::of(markers.iter().map(|m| m.x))?.padded(0.04),
        y: Range::of(markers.iter().map(|m| m.y))?.padded(0.04),
    };
    let mut out = String::new();
    open(&mut out, labels);
    axes(&mut out, &frame, labels);
    for m in markers {
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="{}"/>"#,
            frame.px(m.x),
            frame.py(m.y),
            if m.good { GREEN } else { RED }
        );
    }
    legend_entry(&mut out, 0, &dot_swatch(0, GREEN), &legend.0);
    legend_entry(&mut out, 1, &dot_swatch(1, RED), &legend.1);
    out.push_str("</svg>\n");
    Ok(out)
}
