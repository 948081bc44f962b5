//! Small SVG writer and the log-log exclusion plot.

use std::fmt::Write as _;

use crate::scan::{ExclusionCurve, ReferenceFamily};
use crate::units::CouplingMode;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;

/// Accumulates SVG elements in drawing order.
#[derive(Debug, Default)]
pub struct Svg {
    width: f64,
    height: f64,
    elements: Vec<String>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn points_attr(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Svg { width, height, elements: Vec::new() }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        self.elements
            .push(format!(r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" {style}/>"#));
    }

    pub fn line(&mut self, from: (f64, f64), to: (f64, f64), style: &str) {
        self.elements.push(format!(
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
            from.0, from.1, to.0, to.1
        ));
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], style: &str) {
        self.elements.push(format!(r#"<polyline points="{}" fill="none" {style}/>"#, points_attr(points)));
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], style: &str) {
        self.elements.push(format!(r#"<polygon points="{}" {style}/>"#, points_attr(points)));
    }

    pub fn circle(&mut self, center: (f64, f64), r: f64, style: &str) {
        self.elements
            .push(format!(r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" {style}/>"#, center.0, center.1));
    }

    pub fn text(&mut self, at: (f64, f64), text: &str, style: &str) {
        self.elements.push(format!(
            r#"<text x="{:.2}" y="{:.2}" {style}>{}</text>"#,
            at.0,
            at.1,
            escape(text)
        ));
    }

    pub fn finish(&self) -> String {
        let mut out = format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        out.push('\n');
        for e in &self.elements {
            out.push_str(e);
            out.push('\n');
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Maps log10 data coordinates onto the plot frame.
struct Frame {
    x_dec: (i32, i32),
    y_dec: (i32, i32),
}

impl Frame {
    fn px(&self, r: f64) -> f64 {
        let (a, b) = (self.x_dec.0 as f64, self.x_dec.1 as f64);
        LEFT + (r.log10() - a) / (b - a) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, lambda: f64) -> f64 {
        let (a, b) = (self.y_dec.0 as f64, self.y_dec.1 as f64);
        let y = HEIGHT - BOTTOM - (lambda.log10() - a) / (b - a) * (HEIGHT - TOP - BOTTOM);
        y.clamp(TOP, HEIGHT - BOTTOM)
    }
}

fn decades(values: impl Iterator<Item = f64>) -> (i32, i32) {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0, 1);
    }
    let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    if a == b {
        (a, a + 1)
    } else {
        (a, b)
    }
}

fn curve_colour(coupling: CouplingMode) -> (&'static str, &'static str) {
    match coupling {
        CouplingMode::MassProportional => ("#c0392b", "mass-proportional"),
        CouplingMode::NonMassProportional => ("#2471a3", "non-mass-proportional"),
    }
}

/// Renders exclusion curves (region above each curve shaded), reference
/// markers and an optional boundary overlay on log-log axes.
pub fn exclusion_plot(curves: &[ExclusionCurve], references: &[ReferenceFamily], overlay: &[(f64, f64)]) -> String {
    let ref_points = || references.iter().flat_map(|f| f.points());
    let xs = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.r_c))
        .chain(ref_points().map(|p| p.r_c))
        .chain(overlay.iter().map(|p| p.0));
    let ys = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.lambda_limit))
        .chain(ref_points().map(|p| p.lambda))
        .chain(overlay.iter().map(|p| p.1));
    let frame = Frame { x_dec: decades(xs), y_dec: decades(ys) };

    let mut svg = Svg::new(WIDTH, HEIGHT);
    svg.rect(0.0, 0.0, WIDTH, HEIGHT, r#"fill="white""#);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);

    for c in curves {
        let (colour, _) = curve_colour(c.coupling);
        let mut region: Vec<(f64, f64)> = c.points.iter().map(|p| (frame.px(p.r_c), frame.py(p.lambda_limit))).collect();
        if let (Some(first), Some(last)) = (region.first().copied(), region.last().copied()) {
            region.push((last.0, y0));
            region.push((first.0, y0));
            svg.polygon(&region, &format!(r#"fill="{colour}" fill-opacity="0.15" stroke="none""#));
        }
    }

    for d in frame.x_dec.0..=frame.x_dec.1 {
        let x = frame.px(10f64.powi(d));
        svg.line((x, y1), (x, y1 + 6.0), r#"stroke="black""#);
        svg.text((x, y1 + 22.0), &format!("1e{d}"), r#"font-size="12" text-anchor="middle""#);
    }
    for d in frame.y_dec.0..=frame.y_dec.1 {
        let y = frame.py(10f64.powi(d));
        svg.line((x0 - 6.0, y), (x0, y), r#"stroke="black""#);
        svg.text((x0 - 10.0, y + 4.0), &format!("1e{d}"), r#"font-size="12" text-anchor="end""#);
    }
    svg.rect(x0, y0, x1 - x0, y1 - y0, r#"fill="none" stroke="black""#);
    svg.text(((x0 + x1) / 2.0, HEIGHT - 20.0), "r_C (m)", r#"font-size="14" text-anchor="middle""#);
    svg.text((20.0, (y0 + y1) / 2.0), "λ (1/s)", r#"font-size="14" text-anchor="middle""#);

    if !overlay.is_empty() {
        let pts: Vec<(f64, f64)> = overlay.iter().map(|&(r, l)| (frame.px(r), frame.py(l))).collect();
        svg.polyline(&pts, r#"stroke="gray" stroke-width="1.5" stroke-dasharray="6 4""#);
    }

    for (i, c) in curves.iter().enumerate() {
        let (colour, label) = curve_colour(c.coupling);
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (frame.px(p.r_c), frame.py(p.lambda_limit))).collect();
        svg.polyline(&pts, &format!(r#"stroke="{colour}" stroke-width="2""#));
        svg.text(
            (x0 + 10.0, y0 + 18.0 + 16.0 * i as f64),
            &format!("{label} ({}, CL {})", c.method, c.confidence),
            &format!(r#"font-size="12" fill="{colour}""#),
        );
    }

    for family in references {
        if let Some((lo, hi)) = &family.band {
            svg.line(
                (frame.px(lo.r_c), frame.py(lo.lambda)),
                (frame.px(hi.r_c), frame.py(hi.lambda)),
                r#"stroke="black" stroke-width="1.5""#,
            );
            for p in [lo, hi] {
                svg.circle((frame.px(p.r_c), frame.py(p.lambda)), 2.5, r#"fill="black""#);
            }
        }
        let c = &family.central;
        let at = (frame.px(c.r_c), frame.py(c.lambda));
        svg.circle(at, 5.0, r#"fill="black""#);
        svg.text((at.0 + 8.0, at.1 + 4.0), &family.label, r#"font-size="12""#);
    }

    svg.finish()
}
