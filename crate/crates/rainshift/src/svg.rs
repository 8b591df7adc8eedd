//! SVG figures.
//!
//! Every coordinate is written with two decimals and every element in a
//! fixed order, so identical inputs always produce identical bytes. The
//! computations behind the panels (plotting positions, histogram bins,
//! dendrogram brackets, polar angles) are exposed separately so they can be
//! checked without parsing SVG.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rainshift_core::cluster::Dendrogram;
use rainshift_core::ingest::{DecadalProfile, MonthSeries, MONTH_ABBREVIATIONS};
use rainshift_core::selection::CullenFrey;
use rainshift_core::stats::{quantile_sorted, sorted, BoxStats, TrendLine};
use rainshift_core::{FittedDistribution, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlotKind {
    MonthlyDistribution,
    Polar,
    BoxWhisker,
    MonthlyTrends,
    AnnualTrend,
    Dendrogram,
    DecadalPattern,
    FitDiagnostics,
    CullenFrey,
}

impl PlotKind {
    pub const ALL: [PlotKind; 9] = [
        PlotKind::MonthlyDistribution,
        PlotKind::Polar,
        PlotKind::BoxWhisker,
        PlotKind::MonthlyTrends,
        PlotKind::AnnualTrend,
        PlotKind::Dendrogram,
        PlotKind::DecadalPattern,
        PlotKind::FitDiagnostics,
        PlotKind::CullenFrey,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PlotKind::MonthlyDistribution => "monthly-distribution",
            PlotKind::Polar => "polar",
            PlotKind::BoxWhisker => "box-whisker",
            PlotKind::MonthlyTrends => "monthly-trends",
            PlotKind::AnnualTrend => "annual-trend",
            PlotKind::Dendrogram => "dendrogram",
            PlotKind::DecadalPattern => "decadal-pattern",
            PlotKind::FitDiagnostics => "fit-diagnostics",
            PlotKind::CullenFrey => "cullen-frey",
        }
    }

    fn default_size(self) -> (u32, u32) {
        match self {
            PlotKind::Polar => (640, 640),
            PlotKind::MonthlyTrends => (1200, 900),
            PlotKind::Dendrogram => (1400, 600),
            PlotKind::FitDiagnostics => (1000, 800),
            PlotKind::CullenFrey => (700, 640),
            _ => (900, 560),
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown plot kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub width: u32,
    pub height: u32,
    pub title: String,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: impl Into<String>) -> Self {
        let (width, height) = kind.default_size();
        Self { kind, width, height, title: title.into() }
    }
}

/// The module output each plot kind draws.
#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    MonthlyDistribution(&'a [MonthSeries]),
    /// Mean rainfall for January..December.
    Polar(&'a [f64; 12]),
    BoxWhisker(&'a [BoxStats]),
    MonthlyTrends(&'a [(MonthSeries, TrendLine)]),
    AnnualTrend { totals: &'a [(i32, f64)], trend: &'a TrendLine },
    Dendrogram(&'a Dendrogram),
    DecadalPattern(&'a [DecadalProfile]),
    FitDiagnostics { fitted: &'a FittedDistribution, data: &'a [f64] },
    CullenFrey(&'a CullenFrey),
}

impl PlotData<'_> {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotData::MonthlyDistribution(_) => PlotKind::MonthlyDistribution,
            PlotData::Polar(_) => PlotKind::Polar,
            PlotData::BoxWhisker(_) => PlotKind::BoxWhisker,
            PlotData::MonthlyTrends(_) => PlotKind::MonthlyTrends,
            PlotData::AnnualTrend { .. } => PlotKind::AnnualTrend,
            PlotData::Dendrogram(_) => PlotKind::Dendrogram,
            PlotData::DecadalPattern(_) => PlotKind::DecadalPattern,
            PlotData::FitDiagnostics { .. } => PlotKind::FitDiagnostics,
            PlotData::CullenFrey(_) => PlotKind::CullenFrey,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("plot kind {spec} cannot draw {data} data")]
    DataKindMismatch { spec: PlotKind, data: PlotKind },
    #[error("plot size must be positive, got {width}x{height}")]
    InvalidSize { width: u32, height: u32 },
    #[error("nothing to plot")]
    EmptyData,
}

pub fn render(spec: &PlotSpec, data: &PlotData<'_>) -> Result<String, RenderError> {
    if spec.kind != data.kind() {
        return Err(RenderError::DataKindMismatch { spec: spec.kind, data: data.kind() });
    }
    if spec.width == 0 || spec.height == 0 {
        return Err(RenderError::InvalidSize { width: spec.width, height: spec.height });
    }
    let mut svg = Svg::new(spec);
    let area = Rect { x: 70.0, y: 50.0, w: spec.width as f64 - 100.0, h: spec.height as f64 - 110.0 };
    match *data {
        PlotData::MonthlyDistribution(months) => monthly_distribution(&mut svg, area, months)?,
        PlotData::Polar(means) => polar(&mut svg, spec, means),
        PlotData::BoxWhisker(boxes) => box_whisker(&mut svg, area, boxes)?,
        PlotData::MonthlyTrends(panels) => monthly_trends(&mut svg, spec, panels)?,
        PlotData::AnnualTrend { totals, trend } => annual_trend(&mut svg, area, totals, trend)?,
        PlotData::Dendrogram(d) => dendrogram(&mut svg, area, d),
        PlotData::DecadalPattern(profiles) => decadal_pattern(&mut svg, area, profiles)?,
        PlotData::FitDiagnostics { fitted, data } => fit_diagnostics(&mut svg, spec, fitted, data)?,
        PlotData::CullenFrey(cf) => cullen_frey(&mut svg, area, cf),
    }
    Ok(svg.finish())
}

// ---------------------------------------------------------------------------
// Panel geometry exposed for verification.

/// Hazen plotting position (i − 0.5)/n for the 1-based rank i.
pub fn plotting_position(i: usize, n: usize) -> f64 {
    (i as f64 - 0.5) / n as f64
}

/// Q-Q coordinates: (model quantile at the plotting position, order statistic).
pub fn qq_points(model: &Model, data: &[f64]) -> Vec<(f64, f64)> {
    let n = data.len();
    sorted(data)
        .into_iter()
        .enumerate()
        .map(|(i, x)| (model.quantile(plotting_position(i + 1, n)).unwrap_or(f64::NAN), x))
        .collect()
}

/// P-P coordinates: (plotting position, fitted CDF at the order statistic).
pub fn pp_points(model: &Model, data: &[f64]) -> Vec<(f64, f64)> {
    let n = data.len();
    sorted(data).into_iter().enumerate().map(|(i, x)| (plotting_position(i + 1, n), model.cdf(x))).collect()
}

/// Angle of month `m` (1-based) in radians, measured clockwise from 12 o'clock.
pub fn polar_angle(month: usize) -> f64 {
    2.0 * PI * (month as f64 - 1.0) / 12.0
}

/// Screen position of radius `r` at month `m` around centre (cx, cy);
/// screen y grows downward.
pub fn polar_point(cx: f64, cy: f64, r: f64, month: usize) -> (f64, f64) {
    let a = polar_angle(month);
    (cx + r * a.sin(), cy - r * a.cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Heights normalized so the bars integrate to one.
    pub fn densities(&self) -> Vec<f64> {
        let n: usize = self.counts.iter().sum();
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / (n as f64 * (e[1] - e[0])))
            .collect()
    }
}

/// Equal-width bins: Freedman-Diaconis width 2·IQR·n^(−1/3), or Sturges'
/// count when the IQR is zero.
pub fn histogram(data: &[f64]) -> Histogram {
    let s = sorted(data);
    let n = s.len();
    let (lo, hi) = (s[0], s[n - 1]);
    if hi <= lo {
        return Histogram { edges: vec![lo - 0.5, lo + 0.5], counts: vec![n] };
    }
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let sturges = (1.0 + (n as f64).log2()).ceil() as usize;
    let bins = if iqr > 0.0 {
        let width = 2.0 * iqr / (n as f64).cbrt();
        (((hi - lo) / width).ceil() as usize).clamp(1, 200)
    } else {
        sturges
    };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
    let mut counts = vec![0; bins];
    for &x in &s {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Histogram { edges, counts }
}

/// One dendrogram merge drawn as a bracket. Horizontal positions are in
/// leaf slots: leaf k of [`Dendrogram::leaf_order`] sits at x = k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub left_x: f64,
    pub right_x: f64,
    pub left_height: f64,
    pub right_height: f64,
    pub height: f64,
}

pub fn dendrogram_brackets(d: &Dendrogram) -> Vec<Bracket> {
    let n = d.leaf_count();
    let mut x = vec![0.0; 2 * n - 1];
    for (slot, leaf) in d.leaf_order().into_iter().enumerate() {
        x[leaf] = slot as f64;
    }
    d.steps
        .iter()
        .map(|s| {
            x[s.new_id] = (x[s.left] + x[s.right]) / 2.0;
            Bracket {
                left_x: x[s.left],
                right_x: x[s.right],
                left_height: d.height(s.left),
                right_height: d.height(s.right),
                height: s.height,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Drawing primitives.

const PALETTE: [&str; 13] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939", "#843c39",
];

/// Fixed two-decimal formatting without a negative zero.
struct N(f64);

impl fmt::Display for N {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:.2}", self.0);
        f.write_str(if s == "-0.00" { "0.00" } else { &s })
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Short tick label: integers without decimals, otherwise up to 3 significant decimals.
fn tick_label(v: f64) -> String {
    if v == v.round() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Svg {
    out: String,
}

impl Svg {
    fn new(spec: &PlotSpec) -> Self {
        let mut out = String::new();
        let (w, h) = (spec.width, spec.height);
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, "<title>{}</title>", escape(&spec.title)).unwrap();
        writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##).unwrap();
        let mut svg = Self { out };
        svg.text(w as f64 / 2.0, 28.0, &spec.title, "middle", "font-size=\"16\" font-weight=\"bold\"");
        svg
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }

    fn raw(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        writeln!(self.out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {style}/>"#, N(x1), N(y1), N(x2), N(y2)).unwrap();
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        writeln!(self.out, r#"<rect x="{}" y="{}" width="{}" height="{}" {style}/>"#, N(x), N(y), N(w.max(0.0)), N(h.max(0.0)))
            .unwrap();
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, style: &str) {
        writeln!(self.out, r#"<circle cx="{}" cy="{}" r="{}" {style}/>"#, N(x), N(y), N(r)).unwrap();
    }

    fn polyline(&mut self, pts: &[(f64, f64)], style: &str) {
        if pts.is_empty() {
            return;
        }
        let mut p = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                p.push(' ');
            }
            write!(p, "{},{}", N(*x), N(*y)).unwrap();
        }
        writeln!(self.out, r#"<polyline points="{p}" fill="none" {style}/>"#).unwrap();
    }

    fn polygon(&mut self, pts: &[(f64, f64)], style: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", N(*x), N(*y))).collect();
        writeln!(self.out, r#"<polygon points="{}" {style}/>"#, p.join(" ")).unwrap();
    }

    fn path(&mut self, d: &str, style: &str) {
        writeln!(self.out, r#"<path d="{d}" {style}/>"#).unwrap();
    }

    fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str, extra: &str) {
        writeln!(self.out, r#"<text x="{}" y="{}" text-anchor="{anchor}" {extra}>{}</text>"#, N(x), N(y), escape(s))
            .unwrap();
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

/// 1-2-5 tick sequence covering [lo, hi].
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .min_by(|a, b| (a / raw).ln().abs().total_cmp(&(b / raw).ln().abs()))
        .unwrap();
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Data range padded by 5% on each side, never empty.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

struct Frame {
    r: Rect,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(r: Rect, x: (f64, f64), y: (f64, f64)) -> Self {
        Self { r, x, y }
    }

    fn sx(&self, v: f64) -> f64 {
        self.r.x + (v - self.x.0) / (self.x.1 - self.x.0) * self.r.w
    }

    fn sy(&self, v: f64) -> f64 {
        self.r.y + self.r.h - (v - self.y.0) / (self.y.1 - self.y.0) * self.r.h
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }

    /// Frame, grid-free ticks and axis labels. `x_ticks` overrides numeric x ticks.
    fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str, x_ticks: Option<&[(f64, String)]>) {
        let r = self.r;
        svg.rect(r.x, r.y, r.w, r.h, r##"fill="none" stroke="#000000" stroke-width="1""##);
        let xt: Vec<(f64, String)> = match x_ticks {
            Some(t) => t.to_vec(),
            None => nice_ticks(self.x.0, self.x.1, 6).into_iter().map(|v| (v, tick_label(v))).collect(),
        };
        for (v, label) in xt {
            let x = self.sx(v);
            svg.line(x, r.y + r.h, x, r.y + r.h + 4.0, r##"stroke="#000000""##);
            svg.text(x, r.y + r.h + 17.0, &label, "middle", "");
        }
        for v in nice_ticks(self.y.0, self.y.1, 5) {
            let y = self.sy(v);
            svg.line(r.x - 4.0, y, r.x, y, r##"stroke="#000000""##);
            svg.text(r.x - 7.0, y + 4.0, &tick_label(v), "end", "");
        }
        svg.text(r.x + r.w / 2.0, r.y + r.h + 36.0, x_label, "middle", "");
        let (lx, ly) = (r.x - 50.0, r.y + r.h / 2.0);
        svg.text(lx, ly, y_label, "middle", &format!(r#"transform="rotate(-90 {} {})""#, N(lx), N(ly)));
    }
}

fn month_ticks() -> Vec<(f64, String)> {
    MONTH_ABBREVIATIONS.iter().enumerate().map(|(i, m)| (i as f64 + 1.0, m.to_string())).collect()
}

fn min_max(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(lo, hi): (f64, f64)| (lo.min(v), hi.max(v)))))
}

// ---------------------------------------------------------------------------
// Figures.

fn monthly_distribution(svg: &mut Svg, area: Rect, months: &[MonthSeries]) -> Result<(), RenderError> {
    let (_, hi) = min_max(months.iter().flat_map(|m| m.values.iter().copied())).ok_or(RenderError::EmptyData)?;
    let f = Frame::new(area, (0.4, 12.6), (0.0, padded(0.0, hi).1));
    f.axes(svg, "Month", "Rainfall (mm)", Some(&month_ticks()));
    for m in months {
        let c = m.month as f64;
        let n = m.values.len().max(1);
        for (i, &v) in m.values.iter().enumerate() {
            // Spread years evenly across the month's slot.
            let dx = -0.3 + 0.6 * (i as f64 + 0.5) / n as f64;
            svg.circle(f.sx(c + dx), f.sy(v), 1.8, r##"fill="#1f77b4" fill-opacity="0.5""##);
        }
        let mean = m.values.iter().sum::<f64>() / n as f64;
        svg.line(f.sx(c - 0.35), f.sy(mean), f.sx(c + 0.35), f.sy(mean), r##"stroke="#d62728" stroke-width="2""##);
    }
    Ok(())
}

fn polar(svg: &mut Svg, spec: &PlotSpec, means: &[f64; 12]) {
    let (w, h) = (spec.width as f64, spec.height as f64);
    let (cx, cy) = (w / 2.0, h / 2.0 + 15.0);
    let radius = (w.min(h) / 2.0 - 70.0).max(10.0);
    let top = means.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let rings = nice_ticks(0.0, if top > 0.0 { top } else { 1.0 }, 4);
    let outer = rings.last().copied().filter(|&v| v >= top && v > 0.0).unwrap_or(if top > 0.0 { top } else { 1.0 });
    let scale = radius / outer;
    for &v in rings.iter().filter(|&&v| v > 0.0) {
        svg.circle(cx, cy, v * scale, r##"fill="none" stroke="#cccccc""##);
        svg.text(cx + 3.0, cy - v * scale - 3.0, &tick_label(v), "start", r##"fill="#666666" font-size="10""##);
    }
    for m in 1..=12 {
        let (x, y) = polar_point(cx, cy, radius, m);
        svg.line(cx, cy, x, y, r##"stroke="#cccccc""##);
        let (lx, ly) = polar_point(cx, cy, radius + 18.0, m);
        svg.text(lx, ly + 4.0, MONTH_ABBREVIATIONS[m - 1], "middle", "");
    }
    let pts: Vec<(f64, f64)> = (1..=12).map(|m| polar_point(cx, cy, means[m - 1].max(0.0) * scale, m)).collect();
    svg.polygon(&pts, r##"fill="#1f77b4" fill-opacity="0.3" stroke="#1f77b4" stroke-width="2""##);
    for (x, y) in pts {
        svg.circle(x, y, 3.0, r##"fill="#1f77b4""##);
    }
}

fn box_whisker(svg: &mut Svg, area: Rect, boxes: &[BoxStats]) -> Result<(), RenderError> {
    let (lo, hi) = min_max(boxes.iter().flat_map(|b| {
        [b.lower_adjacent, b.upper_adjacent].into_iter().chain(b.outliers.iter().map(|o| o.value))
    }))
    .ok_or(RenderError::EmptyData)?;
    let f = Frame::new(area, (0.4, boxes.len() as f64 + 0.6), padded(lo.min(0.0), hi));
    let ticks: Vec<(f64, String)> = if boxes.len() == 12 {
        month_ticks()
    } else {
        (1..=boxes.len()).map(|i| (i as f64, i.to_string())).collect()
    };
    f.axes(svg, "Month", "Rainfall (mm)", Some(&ticks));
    for (i, b) in boxes.iter().enumerate() {
        let c = i as f64 + 1.0;
        let (l, r) = (f.sx(c - 0.3), f.sx(c + 0.3));
        let stroke = r##"stroke="#000000""##;
        svg.line(f.sx(c), f.sy(b.upper_adjacent), f.sx(c), f.sy(b.q3), stroke);
        svg.line(f.sx(c), f.sy(b.q1), f.sx(c), f.sy(b.lower_adjacent), stroke);
        svg.line(f.sx(c - 0.15), f.sy(b.upper_adjacent), f.sx(c + 0.15), f.sy(b.upper_adjacent), stroke);
        svg.line(f.sx(c - 0.15), f.sy(b.lower_adjacent), f.sx(c + 0.15), f.sy(b.lower_adjacent), stroke);
        svg.rect(l, f.sy(b.q3), r - l, f.sy(b.q1) - f.sy(b.q3), r##"fill="#9ecae1" stroke="#000000""##);
        svg.line(l, f.sy(b.median), r, f.sy(b.median), r##"stroke="#000000" stroke-width="2""##);
        for o in &b.outliers {
            svg.circle(f.sx(c), f.sy(o.value), 2.5, r##"fill="none" stroke="#d62728""##);
        }
    }
    Ok(())
}

fn scatter_with_trend(svg: &mut Svg, f: &Frame, pts: &[(f64, f64)], trend: &TrendLine, dot: f64) {
    for &(x, y) in pts {
        svg.circle(f.sx(x), f.sy(y), dot, r##"fill="#1f77b4" fill-opacity="0.6""##);
    }
    let (x0, x1) = (f.x.0, f.x.1);
    svg.line(f.sx(x0), f.sy(trend.predict(x0)), f.sx(x1), f.sy(trend.predict(x1)), r##"stroke="#d62728" stroke-width="1.5""##);
}

fn year_range(years: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    min_max(years).map(|(lo, hi)| (lo - 0.5, hi + 0.5))
}

fn monthly_trends(svg: &mut Svg, spec: &PlotSpec, panels: &[(MonthSeries, TrendLine)]) -> Result<(), RenderError> {
    if panels.is_empty() {
        return Err(RenderError::EmptyData);
    }
    let cols = 3;
    let rows = panels.len().div_ceil(cols);
    let cell_w = (spec.width as f64 - 40.0) / cols as f64;
    let cell_h = (spec.height as f64 - 50.0) / rows as f64;
    for (i, (series, trend)) in panels.iter().enumerate() {
        let (row, col) = (i / cols, i % cols);
        let area = Rect {
            x: 20.0 + col as f64 * cell_w + 60.0,
            y: 50.0 + row as f64 * cell_h + 20.0,
            w: cell_w - 80.0,
            h: cell_h - 75.0,
        };
        let xr = year_range(series.years.iter().map(|&y| y as f64)).ok_or(RenderError::EmptyData)?;
        let (_, hi) = min_max(series.values.iter().copied()).ok_or(RenderError::EmptyData)?;
        let f = Frame::new(area, xr, (0.0, padded(0.0, hi).1));
        f.axes(svg, "Year", "mm", None);
        svg.text(area.x + area.w / 2.0, area.y - 6.0, series.name(), "middle", r#"font-weight="bold""#);
        let pts: Vec<(f64, f64)> = series.years.iter().zip(&series.values).map(|(&y, &v)| (y as f64, v)).collect();
        scatter_with_trend(svg, &f, &pts, trend, 1.6);
    }
    Ok(())
}

fn annual_trend(svg: &mut Svg, area: Rect, totals: &[(i32, f64)], trend: &TrendLine) -> Result<(), RenderError> {
    let xr = year_range(totals.iter().map(|t| t.0 as f64)).ok_or(RenderError::EmptyData)?;
    let (lo, hi) = min_max(totals.iter().map(|t| t.1)).ok_or(RenderError::EmptyData)?;
    let f = Frame::new(area, xr, padded(lo, hi));
    f.axes(svg, "Year", "Annual rainfall (mm)", None);
    let pts: Vec<(f64, f64)> = totals.iter().map(|&(y, v)| (y as f64, v)).collect();
    let screen: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (f.sx(x), f.sy(y))).collect();
    svg.polyline(&screen, r##"stroke="#1f77b4" stroke-opacity="0.6""##);
    scatter_with_trend(svg, &f, &pts, trend, 2.2);
    let label = format!("slope {:.3} mm/yr, R² {:.3}", trend.slope, trend.r_squared);
    svg.text(area.x + area.w - 6.0, area.y + 16.0, &label, "end", "");
    Ok(())
}

fn dendrogram(svg: &mut Svg, area: Rect, d: &Dendrogram) {
    let n = d.leaf_count();
    let top = d.steps.iter().map(|s| s.height).fold(0.0, f64::max);
    let f = Frame::new(area, (-0.5, n as f64 - 0.5), (0.0, if top > 0.0 { top * 1.05 } else { 1.0 }));
    let order = d.leaf_order();
    let ticks: Vec<(f64, String)> = Vec::new();
    f.axes(svg, "", "Height", Some(&ticks));
    let font = if n > 60 { 8 } else if n > 30 { 10 } else { 12 };
    for (slot, &leaf) in order.iter().enumerate() {
        let (x, y) = (f.sx(slot as f64), area.y + area.h + 6.0);
        svg.text(
            x,
            y,
            &d.leaf_labels[leaf],
            "end",
            &format!(r#"font-size="{font}" transform="rotate(-90 {} {})" dominant-baseline="middle""#, N(x), N(y)),
        );
    }
    for b in dendrogram_brackets(d) {
        let path = format!(
            "M{},{} V{} H{} V{}",
            N(f.sx(b.left_x)),
            N(f.sy(b.left_height)),
            N(f.sy(b.height)),
            N(f.sx(b.right_x)),
            N(f.sy(b.right_height))
        );
        svg.path(&path, r##"class="merge" fill="none" stroke="#1f3b73" stroke-width="1.2""##);
    }
}

fn decadal_pattern(svg: &mut Svg, area: Rect, profiles: &[DecadalProfile]) -> Result<(), RenderError> {
    let (_, hi) = min_max(profiles.iter().flat_map(|p| p.monthly_means)).ok_or(RenderError::EmptyData)?;
    let plot = Rect { w: area.w - 130.0, ..area };
    let f = Frame::new(plot, (0.6, 12.4), (0.0, padded(0.0, hi).1));
    f.axes(svg, "Month", "Mean rainfall (mm)", Some(&month_ticks()));
    for (i, p) in profiles.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> =
            p.monthly_means.iter().enumerate().map(|(m, &v)| (f.sx(m as f64 + 1.0), f.sy(v))).collect();
        svg.polyline(&pts, &format!(r#"stroke="{color}" stroke-width="1.5""#));
        let ly = area.y + 12.0 + 18.0 * i as f64;
        let lx = plot.x + plot.w + 15.0;
        svg.line(lx, ly - 4.0, lx + 20.0, ly - 4.0, &format!(r#"stroke="{color}" stroke-width="2""#));
        svg.text(lx + 25.0, ly, &format!("{}-{}", p.start_year, p.end_year), "start", "");
    }
    Ok(())
}

fn fit_diagnostics(svg: &mut Svg, spec: &PlotSpec, fitted: &FittedDistribution, data: &[f64]) -> Result<(), RenderError> {
    if data.is_empty() {
        return Err(RenderError::EmptyData);
    }
    let model = fitted.model();
    let (w, h) = (spec.width as f64, spec.height as f64);
    let pw = (w - 60.0) / 2.0;
    let ph = (h - 60.0) / 2.0;
    let panel = |col: usize, row: usize| Rect {
        x: 30.0 + col as f64 * pw + 55.0,
        y: 50.0 + row as f64 * ph + 25.0,
        w: pw - 80.0,
        h: ph - 80.0,
    };
    let caption = |svg: &mut Svg, r: Rect, s: &str| svg.text(r.x + r.w / 2.0, r.y - 8.0, s, "middle", r#"font-weight="bold""#);
    let s = sorted(data);
    let (lo, hi) = (s[0], s[s.len() - 1]);

    // Histogram with density overlay.
    let r = panel(0, 0);
    let hist = histogram(data);
    let dens = hist.densities();
    let xr = padded(hist.edges[0], hist.edges[hist.edges.len() - 1]);
    let grid: Vec<(f64, f64)> = (0..=200)
        .map(|i| xr.0 + (xr.1 - xr.0) * i as f64 / 200.0)
        .map(|x| (x, model.pdf(x)))
        .filter(|p| p.1.is_finite())
        .collect();
    let hist_top = dens.iter().copied().fold(0.0, f64::max);
    let pdf_top = grid.iter().map(|p| p.1).fold(0.0, f64::max).min(3.0 * hist_top.max(f64::MIN_POSITIVE));
    let f = Frame::new(r, xr, (0.0, hist_top.max(pdf_top) * 1.08));
    f.axes(svg, "Data", "Density", None);
    caption(svg, r, &format!("Empirical and theoretical densities ({})", fitted.family));
    for (e, d) in hist.edges.windows(2).zip(&dens) {
        svg.rect(f.sx(e[0]), f.sy(*d), f.sx(e[1]) - f.sx(e[0]), f.sy(0.0) - f.sy(*d), r##"fill="#c6dbef" stroke="#6baed6""##);
    }
    let curve: Vec<(f64, f64)> = grid.iter().map(|&(x, y)| (f.sx(x), f.sy(y.min(f.y.1)))).collect();
    svg.polyline(&curve, r##"stroke="#d62728" stroke-width="2""##);

    // Q-Q.
    let r = panel(1, 0);
    let qq = qq_points(&model, data);
    let (qlo, qhi) = min_max(qq.iter().flat_map(|p| [p.0, p.1])).unwrap_or((lo, hi));
    let f = Frame::new(r, padded(qlo, qhi), padded(qlo, qhi));
    f.axes(svg, "Theoretical quantiles", "Empirical quantiles", None);
    caption(svg, r, "Q-Q plot");
    svg.line(f.sx(f.x.0), f.sy(f.x.0), f.sx(f.x.1), f.sy(f.x.1), r##"stroke="#999999" stroke-dasharray="4 3""##);
    for &(x, y) in qq.iter().filter(|p| f.contains(p.0, p.1)) {
        svg.circle(f.sx(x), f.sy(y), 2.2, r##"class="qq" fill="#1f77b4""##);
    }

    // Empirical vs fitted CDF.
    let r = panel(0, 1);
    let f = Frame::new(r, padded(lo, hi), (0.0, 1.0));
    f.axes(svg, "Data", "CDF", None);
    caption(svg, r, "Empirical and theoretical CDFs");
    let n = s.len() as f64;
    let mut steps = vec![(f.sx(f.x.0), f.sy(0.0))];
    for (i, &x) in s.iter().enumerate() {
        steps.push((f.sx(x), f.sy(i as f64 / n)));
        steps.push((f.sx(x), f.sy((i + 1) as f64 / n)));
    }
    steps.push((f.sx(f.x.1), f.sy(1.0)));
    svg.polyline(&steps, r##"stroke="#000000""##);
    let cdf: Vec<(f64, f64)> =
        (0..=200).map(|i| f.x.0 + (f.x.1 - f.x.0) * i as f64 / 200.0).map(|x| (f.sx(x), f.sy(model.cdf(x)))).collect();
    svg.polyline(&cdf, r##"stroke="#d62728" stroke-width="2""##);

    // P-P.
    let r = panel(1, 1);
    let f = Frame::new(r, (0.0, 1.0), (0.0, 1.0));
    f.axes(svg, "Empirical probabilities", "Theoretical probabilities", None);
    caption(svg, r, "P-P plot");
    svg.line(f.sx(0.0), f.sy(0.0), f.sx(1.0), f.sy(1.0), r##"stroke="#999999" stroke-dasharray="4 3""##);
    for (p, c) in pp_points(&model, data) {
        svg.circle(f.sx(p), f.sy(c), 2.2, r##"class="pp" fill="#1f77b4""##);
    }
    Ok(())
}

fn cullen_frey(svg: &mut Svg, area: Rect, cf: &CullenFrey) {
    let plot = Rect { w: area.w - 150.0, ..area };
    let geo = &cf.reference;
    let obs = cf.observation;
    let x_hi = cf.bootstrap.iter().map(|p| p.skewness_squared).chain([obs.skewness_squared * 1.2, 4.0]).fold(0.0, f64::max);
    let y_hi = cf
        .bootstrap
        .iter()
        .map(|p| p.kurtosis)
        .chain([obs.kurtosis * 1.1, 10.0, geo.beta_lower_bound.0 + geo.beta_lower_bound.1 * x_hi + 1.0])
        .fold(0.0, f64::max);
    let f = Frame::new(plot, (0.0, x_hi), (1.0, y_hi));
    let clip = |(x, y): (f64, f64)| (f.sx(x.min(x_hi)), f.sy(y.clamp(1.0, y_hi)));

    // Beta region between the attainable lower bound and the gamma line.
    let (bi, bs) = geo.beta_lower_bound;
    let (gi, gs) = geo.gamma_line;
    let mut region: Vec<(f64, f64)> = (0..=40).map(|i| x_hi * i as f64 / 40.0).map(|x| clip((x, bi + bs * x))).collect();
    region.extend((0..=40).rev().map(|i| x_hi * i as f64 / 40.0).map(|x| clip((x, gi + gs * x))));
    svg.polygon(&region, r##"fill="#e5e5e5" stroke="none""##);
    f.axes(svg, "Square of skewness", "Kurtosis", None);

    let lower: Vec<(f64, f64)> = [0.0, x_hi].iter().map(|&x| clip((x, bi + bs * x))).collect();
    svg.polyline(&lower, r##"stroke="#555555" stroke-dasharray="2 2""##);
    let gamma: Vec<(f64, f64)> = [0.0, x_hi].iter().map(|&x| clip((x, gi + gs * x))).collect();
    svg.polyline(&gamma, r##"stroke="#2ca02c" stroke-dasharray="6 3" stroke-width="1.5""##);
    let lognormal: Vec<(f64, f64)> = std::iter::once((0.0, 3.0))
        .chain(geo.lognormal_curve.iter().copied())
        .filter(|&(x, y)| f.contains(x, y))
        .map(clip)
        .collect();
    svg.polyline(&lognormal, r##"stroke="#9467bd" stroke-dasharray="1 3" stroke-width="2""##);

    for p in &cf.bootstrap {
        let (x, y) = clip((p.skewness_squared, p.kurtosis));
        svg.circle(x, y, 2.0, r##"fill="none" stroke="#ff7f0e" stroke-opacity="0.6""##);
    }
    let refs = [
        (geo.normal, "normal", "*"),
        (geo.uniform, "uniform", "u"),
        (geo.exponential, "exponential", "e"),
        (geo.logistic, "logistic", "l"),
    ];
    for ((x, y), _, sym) in refs {
        let (sx, sy) = clip((x, y));
        svg.text(sx, sy + 5.0, sym, "middle", r#"font-size="16" font-weight="bold""#);
    }
    let (ox, oy) = clip((obs.skewness_squared, obs.kurtosis));
    svg.circle(ox, oy, 5.0, r##"fill="#1f3b73""##);

    let lx = plot.x + plot.w + 15.0;
    let mut ly = area.y + 12.0;
    let mut entry = |svg: &mut Svg, mark: &dyn Fn(f64) -> String, label: &str| {
        svg.raw(&mark(ly));
        svg.text(lx + 30.0, ly + 4.0, label, "start", "");
        ly += 20.0;
    };
    entry(svg, &|y| format!(r##"<circle cx="{}" cy="{}" r="5" fill="#1f3b73"/>"##, N(lx + 10.0), N(y)), "Observation");
    entry(
        svg,
        &|y| format!(r##"<circle cx="{}" cy="{}" r="2" fill="none" stroke="#ff7f0e"/>"##, N(lx + 10.0), N(y)),
        &format!("Bootstrap ({})", cf.bootstrap.len()),
    );
    for (_, name, sym) in refs {
        entry(
            svg,
            &|y| format!(r#"<text x="{}" y="{}" text-anchor="middle" font-weight="bold">{sym}</text>"#, N(lx + 10.0), N(y + 5.0)),
            name,
        );
    }
    let line = |style: &'static str| {
        move |y: f64| format!(r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {style}/>"#, N(lx), N(y), N(lx + 20.0), N(y))
    };
    entry(svg, &line(r##"stroke="#2ca02c" stroke-dasharray="6 3""##), "gamma");
    entry(svg, &line(r##"stroke="#9467bd" stroke-dasharray="1 3" stroke-width="2""##), "lognormal");
    entry(svg, &|y| format!(r##"<rect x="{}" y="{}" width="20" height="10" fill="#e5e5e5"/>"##, N(lx), N(y - 5.0)), "beta");
}

#[cfg(test)]
mod tests {
    use super::*;
    use rainshift_core::cluster::{agglomerate, distance_matrix, Linkage, Metric, Standardize};
    use rainshift_core::distributions::{fit_mle, Family};

    fn single_linkage_015() -> Dendrogram {
        let items: Vec<(String, Vec<f64>)> =
            [0.0, 1.0, 5.0].iter().enumerate().map(|(i, &x)| (i.to_string(), vec![x])).collect();
        agglomerate(&distance_matrix(&items, Metric::Euclidean, Standardize::None).unwrap(), Linkage::Single)
    }

    #[test]
    fn dendrogram_brackets_hand_case() {
        let d = single_linkage_015();
        let b = dendrogram_brackets(&d);
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].height, b[1].height), (1.0, 4.0));
        assert_eq!((b[0].left_height, b[0].right_height), (0.0, 0.0));
        // Leaf order is 2, 0, 1, so {0,1} spans slots 1 and 2.
        assert_eq!((b[0].left_x, b[0].right_x), (1.0, 2.0));
        assert_eq!((b[1].left_x, b[1].right_x, b[1].right_height), (0.0, 1.5, 1.0));
        let svg = render(&PlotSpec::new(PlotKind::Dendrogram, "d"), &PlotData::Dendrogram(&d)).unwrap();
        assert_eq!(svg.matches(r#"class="merge""#).count(), 2);
    }

    #[test]
    fn qq_of_model_quantiles_is_the_identity() {
        let model = Model::new(Family::Gamma, &[7.727, 0.0259]).unwrap();
        let n = 50;
        let data: Vec<f64> = (1..=n).map(|i| model.quantile(plotting_position(i, n)).unwrap()).collect();
        for (t, e) in qq_points(&model, &data) {
            assert!((t - e).abs() <= 1e-9 * e.abs().max(1.0));
        }
        for (p, c) in pp_points(&model, &data) {
            assert!((p - c).abs() <= 1e-9);
        }
    }

    #[test]
    fn polar_layout() {
        assert_eq!(polar_angle(1), 0.0);
        assert!((polar_angle(4) - PI / 2.0).abs() < 1e-15);
        let (x, y) = polar_point(0.0, 0.0, 1.0, 1);
        assert!(x.abs() < 1e-15 && (y + 1.0).abs() < 1e-15);
        // March sits clockwise of January: to the right of centre.
        let (x, _) = polar_point(0.0, 0.0, 1.0, 3);
        assert!(x > 0.0);
        let (x, y) = polar_point(0.0, 0.0, 1.0, 7);
        assert!(x.abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_rules() {
        let data: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let h = histogram(&data);
        // FD width 2·49.5/100^(1/3) ≈ 21.33 over a range of 99.
        assert_eq!(h.counts.len(), 5);
        assert_eq!(h.counts.iter().sum::<usize>(), 100);
        let total: f64 = h.densities().iter().zip(h.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum();
        assert!((total - 1.0).abs() < 1e-12);

        let mut zeros = vec![0.0; 20];
        zeros.push(7.0);
        let h = histogram(&zeros);
        assert_eq!(h.counts.len(), 6);
        assert_eq!(h.counts[5], 1);
        assert_eq!(histogram(&[3.0, 3.0]).counts, vec![2]);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let d = single_linkage_015();
        let err = render(&PlotSpec::new(PlotKind::Polar, "p"), &PlotData::Dendrogram(&d)).unwrap_err();
        assert_eq!(err, RenderError::DataKindMismatch { spec: PlotKind::Polar, data: PlotKind::Dendrogram });
        let mut spec = PlotSpec::new(PlotKind::Dendrogram, "d");
        spec.width = 0;
        assert!(matches!(render(&spec, &PlotData::Dendrogram(&d)), Err(RenderError::InvalidSize { .. })));
    }

    #[test]
    fn documents_are_well_formed_and_escaped() {
        let data = [114.95, 180.2, 250.0, 291.15, 298.0, 310.5, 333.3, 402.0, 480.7, 608.89];
        let fitted = fit_mle(Family::Gamma, &data).unwrap();
        let spec = PlotSpec::new(PlotKind::FitDiagnostics, "August <gamma> & \"friends\"");
        let svg = render(&spec, &PlotData::FitDiagnostics { fitted: &fitted, data: &data }).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(svg.matches(r#"class="qq""#).count(), 10);
        assert_eq!(svg.matches(r#"class="pp""#).count(), 10);
        assert_eq!(svg, render(&spec, &PlotData::FitDiagnostics { fitted: &fitted, data: &data }).unwrap());
    }

    #[test]
    fn ticks() {
        assert_eq!(nice_ticks(0.0, 10.0, 5), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(nice_ticks(1901.0, 2022.0, 6), vec![1920.0, 1940.0, 1960.0, 1980.0, 2000.0, 2020.0]);
        assert_eq!(tick_label(0.25), "0.25");
        assert_eq!(tick_label(-0.0), "0");
        assert_eq!(N(-0.001).to_string(), "0.00");
    }
}
