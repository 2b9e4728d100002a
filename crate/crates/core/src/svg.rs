//! Minimal standalone SVG line and bar charts.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Lines,
    Bars,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Series {
            name: name.to_string(),
            values,
        }
    }
}

/// Data of one chart. Lines use `x`; bars use `categories`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub categories: Vec<String>,
    pub series: Vec<Series>,
    /// vertical marker lines at these x values
    pub markers: Vec<f64>,
}

impl Plot {
    pub fn lines(title: &str, x_label: &str, y_label: &str, x: Vec<f64>) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            ..Default::default()
        }
    }

    pub fn bars(title: &str, y_label: &str, categories: Vec<String>) -> Self {
        Plot {
            title: title.into(),
            x_label: String::new(),
            y_label: y_label.into(),
            categories,
            ..Default::default()
        }
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Self {
        self.series.push(Series::new(name, values));
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut r: Option<(f64, f64)> = None;
    for v in values.filter(|v| v.is_finite()) {
        r = Some(match r {
            None => (v, v),
            Some((lo, hi)) => (lo.min(v), hi.max(v)),
        });
    }
    r
}

/// Round tick positions covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders an SVG 1.1 document of `plot`.
pub fn emit_svg(plot: &Plot, kind: PlotKind) -> Result<String> {
    let n = match kind {
        PlotKind::Lines => plot.x.len(),
        PlotKind::Bars => plot.categories.len(),
    };
    if n == 0 || plot.series.is_empty() {
        return Err(Error::EmptyTable(plot.title.clone()));
    }
    for s in &plot.series {
        if s.values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.values.len(),
            });
        }
    }
    let (y0, y1) = finite_range(plot.series.iter().flat_map(|s| s.values.iter().copied()))
        .ok_or_else(|| Error::EmptyTable(plot.title.clone()))?;
    let (y0, y1) = match kind {
        PlotKind::Bars => padded(y0.min(0.0), y1.max(0.0)),
        PlotKind::Lines => padded(y0, y1),
    };
    let (x0, x1) = match kind {
        PlotKind::Lines => {
            let (a, b) = finite_range(plot.x.iter().copied()).ok_or_else(|| Error::EmptyTable(plot.title.clone()))?;
            if b > a {
                (a, b)
            } else {
                padded(a, b)
            }
        }
        PlotKind::Bars => (0.0, n as f64),
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = sy(0.0);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#bbbbbb"/>"##, LEFT + pw);
    }
    let base = TOP + ph;
    match kind {
        PlotKind::Lines => {
            for t in ticks(x0, x1) {
                let x = sx(t);
                let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{}" stroke="black"/>"#, base + 5.0);
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                    base + 20.0,
                    tick_label(t)
                );
            }
            for m in &plot.markers {
                let x = sx(*m);
                let _ = writeln!(
                    s,
                    r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{base}" stroke="#888888" stroke-dasharray="4 4"/>"##
                );
            }
            for (k, series) in plot.series.iter().enumerate() {
                let pts: Vec<String> = plot
                    .x
                    .iter()
                    .zip(&series.values)
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    COLORS[k % COLORS.len()],
                    pts.join(" ")
                );
            }
        }
        PlotKind::Bars => {
            let groups = plot.series.len() as f64;
            let slot = pw / n as f64;
            let bw = 0.8 * slot / groups;
            for (i, cat) in plot.categories.iter().enumerate() {
                let cx = LEFT + (i as f64 + 0.5) * slot;
                let _ = writeln!(
                    s,
                    r#"<text x="{cx:.2}" y="{}" text-anchor="end" transform="rotate(-45 {cx:.2} {})">{}</text>"#,
                    base + 14.0,
                    base + 14.0,
                    escape(cat)
                );
            }
            for (k, series) in plot.series.iter().enumerate() {
                let _ = writeln!(s, r#"<g fill="{}">"#, COLORS[k % COLORS.len()]);
                for (i, v) in series.values.iter().enumerate() {
                    if !v.is_finite() {
                        continue;
                    }
                    let x = LEFT + i as f64 * slot + 0.1 * slot + k as f64 * bw;
                    let (ya, yb) = (sy(v.max(0.0)), sy(v.min(0.0)));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x:.2}" y="{ya:.2}" width="{bw:.2}" height="{:.2}"/>"#,
                        (yb - ya).max(0.0)
                    );
                }
                let _ = writeln!(s, "</g>");
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&plot.y_label)
    );
    for (k, series) in plot.series.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * k as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/>"#,
            y - 10.0,
            COLORS[k % COLORS.len()]
        );
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, escape(&series.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_lines() {
        let p = Plot::lines("t", "x", "y", vec![0.0, 1.0, 2.0])
            .with("a", vec![1.0, 2.0, 3.0])
            .with("b", vec![3.0, 1.0, 0.0]);
        let svg = emit_svg(&p, PlotKind::Lines).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"width="800" height="600""#));
        assert_eq!(svg, emit_svg(&p, PlotKind::Lines).unwrap());
    }

    #[test]
    fn seven_bars() {
        let cats: Vec<String> = ["00", "01", "10", "11", "uudd", "dduu", "INVALID"].iter().map(|s| s.to_string()).collect();
        let p = Plot::bars("h", "p", cats).with("p", vec![0.1, 0.4, 0.4, 0.05, 0.02, 0.03, 0.05]);
        let svg = emit_svg(&p, PlotKind::Bars).unwrap();
        assert_eq!(svg.matches("<rect x=").count(), 7 + 1 + 1);
    }

    #[test]
    fn empty_is_rejected() {
        let p = Plot::lines("t", "x", "y", vec![]);
        assert!(matches!(emit_svg(&p, PlotKind::Lines), Err(Error::EmptyTable(_))));
        let q = Plot::lines("t", "x", "y", vec![1.0]);
        assert!(emit_svg(&q, PlotKind::Lines).is_err());
    }

    #[test]
    fn tick_spacing() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    }
}
