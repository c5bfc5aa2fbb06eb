//! Minimal SVG output: polylines, points and circles in data coordinates.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::Result;

enum Element {
    Line { points: Vec<Complex64>, color: &'static str },
    Points { points: Vec<Complex64>, color: &'static str, radius: f64 },
    Circle { center: Complex64, radius: f64, color: &'static str },
}

/// A complex-plane plot with equal axis scaling.
pub struct Plot {
    title: String,
    size: f64,
    elements: Vec<Element>,
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), size: 640.0, elements: Vec::new() }
    }

    /// Polyline through `points`, broken wherever consecutive points are
    /// further apart than `max_gap`.
    pub fn line(&mut self, points: &[Complex64], max_gap: f64, color: &'static str) -> &mut Self {
        let mut run: Vec<Complex64> = Vec::new();
        for &p in points.iter().filter(|p| p.re.is_finite() && p.im.is_finite()) {
            if let Some(&last) = run.last() {
                if (p - last).norm() > max_gap {
                    self.elements.push(Element::Line { points: std::mem::take(&mut run), color });
                }
            }
            run.push(p);
        }
        if run.len() > 1 {
            self.elements.push(Element::Line { points: run, color });
        }
        self
    }

    pub fn points(&mut self, points: &[Complex64], color: &'static str) -> &mut Self {
        let points = points.iter().copied().filter(|p| p.re.is_finite() && p.im.is_finite()).collect();
        self.elements.push(Element::Points { points, color, radius: 2.5 });
        self
    }

    pub fn circle(&mut self, center: Complex64, radius: f64, color: &'static str) -> &mut Self {
        self.elements.push(Element::Circle { center, radius, color });
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let mut take = |p: Complex64| {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        };
        for e in &self.elements {
            match e {
                Element::Line { points, .. } | Element::Points { points, .. } => points.iter().for_each(|&p| take(p)),
                Element::Circle { center, radius, .. } => {
                    take(center + Complex64::new(*radius, *radius));
                    take(center - Complex64::new(*radius, *radius));
                }
            }
        }
        if !x0.is_finite() {
            return (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12) * 1.08;
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        (cx - 0.5 * span, cx + 0.5 * span, cy - 0.5 * span, cy + 0.5 * span)
    }

    pub fn render(&self) -> String {
        let (x0, x1, _, y1) = self.bounds();
        let s = self.size;
        let scale = s / (x1 - x0);
        let px = |p: Complex64| ((p.re - x0) * scale, (y1 - p.im) * scale);
        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{h}" viewBox="0 0 {s} {h}">"#, h = s + 24.0);
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="8" y="{}" font-family="monospace" font-size="13">{}</text>"#, s + 18.0, escape(&self.title));
        // axes through the origin when visible
        let (ox, oy) = px(Complex64::default());
        if (0.0..=s).contains(&ox) {
            let _ = writeln!(out, r##"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{s}" stroke="#bbb" stroke-width="1"/>"##);
        }
        if (0.0..=s).contains(&oy) {
            let _ = writeln!(out, r##"<line x1="0" y1="{oy:.2}" x2="{s}" y2="{oy:.2}" stroke="#bbb" stroke-width="1"/>"##);
        }
        for e in &self.elements {
            match e {
                Element::Line { points, color } => {
                    let coords: Vec<String> = points.iter().map(|&p| px(p)).map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
                    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
                }
                Element::Points { points, color, radius } => {
                    for &p in points {
                        let (a, b) = px(p);
                        let _ = writeln!(out, r#"<circle cx="{a:.2}" cy="{b:.2}" r="{radius}" fill="{color}"/>"#);
                    }
                }
                Element::Circle { center, radius, color } => {
                    let (a, b) = px(*center);
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{a:.2}" cy="{b:.2}" r="{:.2}" fill="none" stroke="{color}" stroke-dasharray="6 4"/>"#,
                        radius * scale
                    );
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
