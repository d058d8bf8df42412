use std::fmt::Write as _;

use crate::classify::{Bounds, Grid};

const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];
const UNKNOWN_COLOR: &str = "#999999";

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 40.0;
const TOP: f64 = 40.0;
const SIDE: f64 = 520.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Train,
    Validation,
    Holdout,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotPoint {
    pub xy: [f64; 2],
    /// Index into the class list, `None` for labels outside it.
    pub class: Option<usize>,
    pub kind: PointKind,
}

fn color(class: Option<usize>) -> &'static str {
    class.map_or(UNKNOWN_COLOR, |c| PALETTE[c % PALETTE.len()])
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c if c.is_control() => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

struct Frame {
    bounds: Bounds,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let b = &self.bounds;
        LEFT + (v - b.min[0]) / (b.max[0] - b.min[0]) * SIDE
    }

    fn y(&self, v: f64) -> f64 {
        let b = &self.bounds;
        TOP + SIDE - (v - b.min[1]) / (b.max[1] - b.min[1]) * SIDE
    }
}

/// Scatter plot with optional decision regions and a legend.
///
/// Classes are colored by their index in `classes`, which callers keep
/// sorted. Training points are filled circles, validation points squares
/// and held-out points white circles with a black outline. Output depends
/// only on the inputs.
pub fn emit_svg(
    title: &str,
    classes: &[String],
    points: &[PlotPoint],
    grid: Option<&Grid>,
    bounds: Bounds,
) -> String {
    let frame = Frame {
        bounds: grid.map_or(bounds, |g| g.bounds),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="24" font-family="sans-serif" font-size="16">{}</text>"#,
        escape_xml(title)
    );

    if let Some(g) = grid {
        let _ = writeln!(s, r#"<g class="regions" fill-opacity="0.25">"#);
        let (cw, ch) = (SIDE / g.nx as f64, SIDE / g.ny as f64);
        for iy in 0..g.ny {
            let y = TOP + SIDE - (iy + 1) as f64 * ch;
            let mut ix = 0;
            while ix < g.nx {
                let label = g.at(ix, iy);
                let start = ix;
                while ix < g.nx && g.at(ix, iy) == label {
                    ix += 1;
                }
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                    LEFT + start as f64 * cw,
                    y,
                    (ix - start) as f64 * cw,
                    ch,
                    color(Some(label))
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{SIDE}" height="{SIDE}" fill="none" stroke="black"/>"#
    );

    let _ = writeln!(s, r#"<g class="points">"#);
    for p in points {
        let (x, y) = (frame.x(p.xy[0]), frame.y(p.xy[1]));
        if !x.is_finite() || !y.is_finite() {
            continue;
        }
        let fill = color(p.class);
        let _ = match p.kind {
            PointKind::Train => writeln!(
                s,
                r#"<circle class="train" cx="{x:.3}" cy="{y:.3}" r="3.5" fill="{fill}"/>"#
            ),
            PointKind::Validation => writeln!(
                s,
                r#"<rect class="validation" x="{:.3}" y="{:.3}" width="7" height="7" fill="{fill}" stroke="black" stroke-width="0.5"/>"#,
                x - 3.5,
                y - 3.5
            ),
            PointKind::Holdout => writeln!(
                s,
                r#"<circle class="holdout" cx="{x:.3}" cy="{y:.3}" r="4.5" fill="white" stroke="black" stroke-width="1.5"/>"#
            ),
        };
    }
    let _ = writeln!(s, "</g>");

    let lx = LEFT + SIDE + 30.0;
    let _ = writeln!(s, r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for (i, label) in classes.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry"><rect x="{lx}" y="{:.3}" width="12" height="12" fill="{}"/><text x="{:.3}" y="{:.3}">{}</text></g>"#,
            y - 10.0,
            color(Some(i)),
            lx + 18.0,
            y,
            escape_xml(label)
        );
    }
    let kinds: Vec<PointKind> = [PointKind::Train, PointKind::Validation, PointKind::Holdout]
        .into_iter()
        .filter(|k| points.iter().any(|p| p.kind == *k))
        .collect();
    for (j, kind) in kinds.iter().enumerate() {
        let y = TOP + 30.0 + 20.0 * (classes.len() + j) as f64;
        let (marker, name) = match kind {
            PointKind::Train => (
                format!(r#"<circle cx="{:.3}" cy="{:.3}" r="3.5" fill="black"/>"#, lx + 6.0, y - 4.0),
                "training",
            ),
            PointKind::Validation => (
                format!(r#"<rect x="{:.3}" y="{:.3}" width="7" height="7" fill="black"/>"#, lx + 2.5, y - 7.5),
                "validation",
            ),
            PointKind::Holdout => (
                format!(
                    r#"<circle cx="{:.3}" cy="{:.3}" r="4.5" fill="white" stroke="black" stroke-width="1.5"/>"#,
                    lx + 6.0,
                    y - 4.0
                ),
                "held-out device",
            ),
        };
        let _ = writeln!(
            s,
            r#"<g class="marker-key">{marker}<text x="{:.3}" y="{y:.3}">{name}</text></g>"#,
            lx + 18.0
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
