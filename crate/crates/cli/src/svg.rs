//! Minimal static SVG output for overlay and scatter plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const PANEL: f64 = 160.0;
const MARGIN: f64 = 24.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn class_color(class: usize) -> &'static str {
    PALETTE[class % PALETTE.len()]
}

struct Scale {
    lo: f64,
    hi: f64,
}

impl Scale {
    fn fit<'a>(values: impl IntoIterator<Item = &'a f64>) -> Self {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() || hi <= lo {
            let c = if lo.is_finite() { lo } else { 0.0 };
            return Scale { lo: c - 1.0, hi: c + 1.0 };
        }
        Scale { lo, hi }
    }

    /// Maps `v` into `[0, 1]`.
    fn unit(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn header(out: &mut String, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct OverlayPanel<'a> {
    pub title: &'a str,
    pub original: &'a [f64],
    pub generated: &'a [f64],
}

/// One panel per method: the original as a dotted blue line and the
/// generated pattern as a solid red line on a shared vertical scale.
pub fn overlay(panels: &[OverlayPanel]) -> String {
    let height = PANEL * panels.len() as f64;
    let mut out = String::new();
    header(&mut out, height);
    for (k, panel) in panels.iter().enumerate() {
        let top = k as f64 * PANEL;
        let scale = Scale::fit(panel.original.iter().chain(panel.generated));
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            top + 14.0,
            escape(panel.title)
        );
        let line = |values: &[f64]| -> String {
            let span = (values.len().max(2) - 1) as f64;
            values
                .iter()
                .enumerate()
                .map(|(t, &v)| {
                    let x = MARGIN + (WIDTH - 2.0 * MARGIN) * t as f64 / span;
                    let y = top + PANEL - MARGIN / 2.0 - (PANEL - 2.0 * MARGIN) * scale.unit(v);
                    format!("{x:.2},{y:.2}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            out,
            r##"<polyline class="original" fill="none" stroke="#1f77b4" stroke-width="1.5" stroke-dasharray="3,3" points="{}"/>"##,
            line(panel.original)
        );
        let _ = writeln!(
            out,
            r##"<polyline class="generated" fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##,
            line(panel.generated)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub class: usize,
    pub generated: bool,
}

/// Scatter with solid markers for originals and hollow ones for generated
/// patterns, coloured by class.
pub fn scatter(title: &str, points: &[ScatterPoint]) -> String {
    let height = WIDTH;
    let sx = Scale::fit(points.iter().map(|p| &p.x));
    let sy = Scale::fit(points.iter().map(|p| &p.y));
    let inner = WIDTH - 2.0 * MARGIN;
    let mut out = String::new();
    header(&mut out, height);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="16" font-family="sans-serif" font-size="12">{}</text>"#,
        escape(title)
    );
    // generated first so originals stay visible on top
    for generated in [true, false] {
        for p in points.iter().filter(|p| p.generated == generated) {
            let x = MARGIN + inner * sx.unit(p.x);
            let y = height - MARGIN - inner * sy.unit(p.y);
            let color = class_color(p.class);
            let (class, fill) = if generated { ("generated", "none") } else { ("original", color) };
            let _ = writeln!(
                out,
                r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{fill}" stroke="{color}" stroke-width="1.2"/>"#
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
