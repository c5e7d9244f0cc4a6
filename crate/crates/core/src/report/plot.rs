//! Minimal deterministic SVG charts.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::report::boxplot::BoxplotStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Box,
    Bar,
    ScatterWithLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub unit: String,
}

impl Axis {
    pub fn new(label: impl Into<String>, unit: impl Into<String>) -> Self {
        Axis {
            label: label.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesData {
    Xy(Vec<(f64, f64)>),
    Categories(Vec<(String, f64)>),
    Boxes(Vec<(String, BoxplotStats)>),
}

impl SeriesData {
    fn len(&self) -> usize {
        match self {
            SeriesData::Xy(v) => v.len(),
            SeriesData::Categories(v) => v.len(),
            SeriesData::Boxes(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub data: SeriesData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub series: Vec<Series>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, title: impl Into<String>, x_axis: Axis, y_axis: Axis, series: Vec<Series>) -> Result<Self> {
        if series.is_empty() || series.iter().any(|s| s.data.len() == 0) {
            return Err(Error::EmptyInput("plot series"));
        }
        if x_axis.unit.is_empty() || y_axis.unit.is_empty() {
            return Err(Error::Config("plot axes need units".into()));
        }
        let shape_ok = series.iter().all(|s| {
            matches!(
                (kind, &s.data),
                (PlotKind::Line | PlotKind::ScatterWithLine, SeriesData::Xy(_))
                    | (PlotKind::Bar, SeriesData::Categories(_))
                    | (PlotKind::Box, SeriesData::Boxes(_))
            )
        });
        if !shape_ok {
            return Err(Error::Config(format!("series data does not fit a {kind:?} plot")));
        }
        if kind == PlotKind::ScatterWithLine && series.len() != 2 {
            return Err(Error::Config("scatter plot needs a point series and a line series".into()));
        }
        Ok(PlotSpec {
            kind,
            title: title.into(),
            x_axis,
            y_axis,
            series,
        })
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new((x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> Self {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 1.0, a + 1.0) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn y_ticks(out: &mut String, f: &Frame) {
    for i in 0..=4 {
        let v = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let y = f.py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ccc" stroke-width="0.5"/>"##,
            num(LEFT - 4.0),
            num(WIDTH - RIGHT)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            num(LEFT - 8.0),
            y + 4.0,
            num(v)
        );
    }
}

fn x_ticks(out: &mut String, f: &Frame) {
    for i in 0..=4 {
        let v = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            f.px(v),
            num(HEIGHT - BOTTOM + 18.0),
            num(v)
        );
    }
}

fn category_labels(out: &mut String, labels: &[&str], f: &Frame) {
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            f.px(i as f64 + 0.5),
            num(HEIGHT - BOTTOM + 18.0),
            escape(label)
        );
    }
}

fn polyline(out: &mut String, f: &Frame, points: &[(f64, f64)], color: &str) {
    out.push_str(r#"<polyline fill="none" stroke=""#);
    out.push_str(color);
    out.push_str(r#"" stroke-width="1" points=""#);
    for (i, &(x, y)) in points.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", f.px(x), f.py(y));
    }
    out.push_str("\"/>\n");
}

fn render_xy(out: &mut String, p: &PlotSpec) {
    let all = || {
        p.series.iter().flat_map(|s| match &s.data {
            SeriesData::Xy(v) => v.as_slice(),
            _ => &[],
        })
    };
    let f = Frame::new(bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1)));
    y_ticks(out, &f);
    x_ticks(out, &f);
    for (k, s) in p.series.iter().enumerate() {
        let SeriesData::Xy(points) = &s.data else { continue };
        let color = PALETTE[k % PALETTE.len()];
        if p.kind == PlotKind::ScatterWithLine && k == 0 {
            for &(x, y) in points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}" fill-opacity="0.5"/>"#,
                    f.px(x),
                    f.py(y)
                );
            }
        } else {
            polyline(out, &f, points, color);
        }
    }
}

fn render_bars(out: &mut String, p: &PlotSpec) {
    let SeriesData::Categories(bars) = &p.series[0].data else { return };
    let (lo, hi) = bounds(bars.iter().map(|b| b.1).chain([0.0]));
    let f = Frame::new((0.0, bars.len() as f64), (lo, hi));
    y_ticks(out, &f);
    let labels: Vec<&str> = bars.iter().map(|b| b.0.as_str()).collect();
    category_labels(out, &labels, &f);
    let width = f.px(0.8) - f.px(0.0);
    for (i, (_, v)) in bars.iter().enumerate() {
        let (top, bottom) = (f.py(v.max(0.0)), f.py(v.min(0.0)));
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{top:.2}" width="{width:.2}" height="{:.2}" fill="{}"/>"#,
            f.px(i as f64 + 0.1),
            bottom - top,
            PALETTE[0]
        );
    }
}

fn render_boxes(out: &mut String, p: &PlotSpec) {
    let SeriesData::Boxes(boxes) = &p.series[0].data else { return };
    let (lo, hi) = bounds(boxes.iter().flat_map(|(_, b)| [b.min, b.max]));
    let f = Frame::new((0.0, boxes.len() as f64), (lo, hi));
    y_ticks(out, &f);
    let labels: Vec<&str> = boxes.iter().map(|b| b.0.as_str()).collect();
    category_labels(out, &labels, &f);
    let color = PALETTE[0];
    for (i, (_, b)) in boxes.iter().enumerate() {
        let (left, mid, right) = (f.px(i as f64 + 0.2), f.px(i as f64 + 0.5), f.px(i as f64 + 0.8));
        let _ = writeln!(
            out,
            r#"<line x1="{mid:.2}" y1="{:.2}" x2="{mid:.2}" y2="{:.2}" stroke="{color}"/>"#,
            f.py(b.whisker_low),
            f.py(b.whisker_high)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{left:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#dbe9f6" stroke="{color}"/>"##,
            f.py(b.q3),
            right - left,
            f.py(b.q1) - f.py(b.q3)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{left:.2}" y1="{y:.2}" x2="{right:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
            y = f.py(b.median)
        );
        for o in &b.outliers {
            let _ = writeln!(
                out,
                r#"<circle cx="{mid:.2}" cy="{:.2}" r="2.5" fill="none" stroke="{color}"/>"#,
                f.py(*o)
            );
        }
    }
}

/// Renders a chart as a standalone SVG document. Output depends only on `p`.
pub fn render_svg(p: &PlotSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(&p.title)
    );
    match p.kind {
        PlotKind::Line | PlotKind::ScatterWithLine => render_xy(&mut out, p),
        PlotKind::Bar => render_bars(&mut out, p),
        PlotKind::Box => render_boxes(&mut out, p),
    }
    let (x_end, y_end) = (WIDTH - RIGHT, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT} {TOP} V{y_end} H{x_end}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{} ({})</text>"#,
        (LEFT + x_end) / 2.0,
        HEIGHT - 20.0,
        escape(&p.x_axis.label),
        escape(&p.x_axis.unit)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {0})">{1} ({2})</text>"#,
        (TOP + y_end) / 2.0,
        escape(&p.y_axis.label),
        escape(&p.y_axis.unit)
    );
    if p.series.len() > 1 {
        for (k, s) in p.series.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" fill="{}">{}</text>"#,
                LEFT + 10.0,
                TOP + 14.0 * (k as f64 + 1.0),
                PALETTE[k % PALETTE.len()],
                escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::boxplot::boxplot_stats;

    fn bars(n: usize) -> PlotSpec {
        let data = (1..=n).map(|m| (format!("{m:02}"), 0.5 + m as f64 / 100.0)).collect();
        PlotSpec::new(
            PlotKind::Bar,
            "R² by month",
            Axis::new("month", "1-12"),
            Axis::new("R²", "-"),
            vec![Series {
                label: "r2".into(),
                data: SeriesData::Categories(data),
            }],
        )
        .unwrap()
    }

    #[test]
    fn svg_root_and_determinism() {
        let p = bars(12);
        let a = render_svg(&p);
        assert!(a.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a, render_svg(&p.clone()));
    }

    #[test]
    fn one_rect_per_bar() {
        assert_eq!(render_svg(&bars(12)).matches("<rect").count(), 12);
        assert_eq!(render_svg(&bars(3)).matches("<rect").count(), 3);
    }

    #[test]
    fn box_and_scatter_render() {
        let stats = boxplot_stats(&[1.0, 2.0, 3.0, 100.0]).unwrap();
        let p = PlotSpec::new(
            PlotKind::Box,
            "a < b & c",
            Axis::new("month", "-"),
            Axis::new("diff", "W/m²"),
            vec![Series {
                label: "d".into(),
                data: SeriesData::Boxes(vec![("03".into(), stats)]),
            }],
        )
        .unwrap();
        let svg = render_svg(&p);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert_eq!(svg.matches("<circle").count(), 1);

        let s = PlotSpec::new(
            PlotKind::ScatterWithLine,
            "scatter",
            Axis::new("satellite", "W/m²"),
            Axis::new("ground", "W/m²"),
            vec![
                Series { label: "test".into(), data: SeriesData::Xy(vec![(1.0, 2.0), (2.0, 4.0)]) },
                Series { label: "fit".into(), data: SeriesData::Xy(vec![(1.0, 2.0), (2.0, 4.0)]) },
            ],
        )
        .unwrap();
        let svg = render_svg(&s);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn spec_validation() {
        let empty = PlotSpec::new(
            PlotKind::Line,
            "t",
            Axis::new("x", "h"),
            Axis::new("y", "W/m²"),
            vec![Series { label: "s".into(), data: SeriesData::Xy(vec![]) }],
        );
        assert!(empty.is_err());
        let no_unit = PlotSpec::new(
            PlotKind::Line,
            "t",
            Axis::new("x", ""),
            Axis::new("y", "W/m²"),
            vec![Series { label: "s".into(), data: SeriesData::Xy(vec![(0.0, 1.0)]) }],
        );
        assert!(no_unit.is_err());
        let wrong = PlotSpec::new(
            PlotKind::Bar,
            "t",
            Axis::new("x", "h"),
            Axis::new("y", "W/m²"),
            vec![Series { label: "s".into(), data: SeriesData::Xy(vec![(0.0, 1.0)]) }],
        );
        assert!(wrong.is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.001), "0");
        assert_eq!(num(2.5), "2.5");
        assert_eq!(num(1234.567), "1234.57");
    }
}
