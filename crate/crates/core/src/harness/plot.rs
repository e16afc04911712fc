//! Static SVG plot of log₂ error against log₂ N.

use std::fmt::Write;

use super::study::{BasisKind, StudyRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Series {
    label: String,
    colour: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn series(rows: &[StudyRow]) -> Vec<Series> {
    let mut out = Vec::new();
    for (basis, colour) in [
        (BasisKind::Augmented, "#1f77b4"),
        (BasisKind::Standard, "#d62728"),
    ] {
        for (norm, dashed) in [("L2", false), ("H1", true)] {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.basis == basis && r.failure.is_none())
                .filter_map(|r| {
                    let e = r.errors?;
                    let v = if dashed { e.rel_h1 } else { e.rel_l2 };
                    (v > 0.0 && v.is_finite()).then(|| ((r.unknowns as f64).log2(), v.log2()))
                })
                .collect();
            if !points.is_empty() {
                out.push(Series {
                    label: format!("{basis} {norm}"),
                    colour,
                    dashed,
                    points,
                });
            }
        }
    }
    out
}

fn ticks(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (lo.floor() as i64..=hi.ceil() as i64).map(|t| t as f64)
}

pub fn error_plot(title: &str, rows: &[StudyRow]) -> String {
    let all = series(rows);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}: relative errors</text>"#,
        WIDTH / 2.0
    );
    let pts = all.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        svg.push_str("<text x=\"320\" y=\"240\" text-anchor=\"middle\">no data</text>\n</svg>\n");
        return svg;
    }
    let (x0, x1, y0, y1) = (
        x0.floor(),
        x1.ceil().max(x0.floor() + 1.0),
        y0.floor(),
        y1.ceil().max(y0.floor() + 1.0),
    );
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for t in ticks(x0, x1) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            sx(t),
            HEIGHT - MARGIN + 16.0
        );
    }
    for t in ticks(y0, y1) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t}</text>"#,
            MARGIN - 6.0,
            sy(t) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">log2(N)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">log2(relative error)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (k, s) in all.iter().enumerate() {
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            path.join(" "),
            s.colour
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"/>"#,
                sx(x),
                sy(y),
                s.colour
            );
        }
        let slope = fitted_slope(&s.points).map_or(String::new(), |m| format!(", slope {m:.2}"));
        let ly = MARGIN + 18.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{}">{}{slope}</text>"#,
            WIDTH - MARGIN - 190.0,
            s.colour,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
