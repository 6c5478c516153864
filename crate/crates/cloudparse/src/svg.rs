//! SVG rendering: parse overlays and sorted-error curves.

use crate::error::{Error, Result};
use crate::geometry::LandmarkShape;
use crate::preprocess::PointCloud;

/// Per-segment dot colors, cycled.
const SEGMENT_COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"];

fn polyline(points: &[(f64, f64)], stroke: &str, width: f64, closed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        d.push_str(if i == 0 { "M" } else { "L" });
        d.push_str(&format!("{x:.2} {y:.2} "));
    }
    if closed {
        d.push('Z');
    }
    format!("<path d=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n", d.trim_end())
}

fn segment_ranges(shape: &LandmarkShape) -> Vec<(usize, usize)> {
    let starts = shape.segment_starts();
    let mut out = Vec::with_capacity(starts.len());
    for (si, &s) in starts.iter().enumerate() {
        let end = if si + 1 < starts.len() { starts[si + 1] } else { shape.len() };
        out.push((s, end));
    }
    out
}

/// Overlay of the input points (gray), the PCA backbone (green), and the
/// parse contour (black with per-segment colored dots).
pub fn render_overlay(
    cloud: &PointCloud,
    backbone: &LandmarkShape,
    contour: &LandmarkShape,
) -> Result<String> {
    if backbone.len() != contour.len() {
        return Err(Error::DimensionMismatch("backbone/contour lengths differ".into()));
    }
    let (w, h) = (cloud.width(), cloud.height());
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    out.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    for &(x, y) in cloud.points() {
        out.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"1\" height=\"1\" fill=\"#9e9e9e\"/>\n"
        ));
    }
    for (s, e) in segment_ranges(backbone) {
        let pts: Vec<(f64, f64)> = backbone.points()[s..e].iter().map(|p| (p.x, p.y)).collect();
        out.push_str(&polyline(&pts, "#2ca02c", 1.5, false));
    }
    for (si, (s, e)) in segment_ranges(contour).into_iter().enumerate() {
        let pts: Vec<(f64, f64)> = contour.points()[s..e].iter().map(|p| (p.x, p.y)).collect();
        out.push_str(&polyline(&pts, "black", 1.0, false));
        let color = SEGMENT_COLORS[si % SEGMENT_COLORS.len()];
        for (x, y) in pts {
            out.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.6\" fill=\"{color}\"/>\n"
            ));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Sorted per-image errors as a step-free polyline plot.
pub fn render_sorted_errors(sorted: &[f64]) -> Result<String> {
    if sorted.is_empty() {
        return Err(Error::InvalidInput("no errors to plot".into()));
    }
    if sorted.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("errors must be sorted ascending".into()));
    }
    let (w, h, margin) = (480.0, 320.0, 40.0);
    let max_err = sorted.last().copied().unwrap().max(1e-9);
    let n = sorted.len();
    let pts: Vec<(f64, f64)> = sorted
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let fx = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            (margin + fx * (w - 2.0 * margin), h - margin - (e / max_err) * (h - 2.0 * margin))
        })
        .collect();
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    out.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    // axes
    out.push_str(&polyline(
        &[(margin, margin), (margin, h - margin), (w - margin, h - margin)],
        "black",
        1.0,
        false,
    ));
    out.push_str(&polyline(&pts, "#1f77b4", 1.5, false));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"12\">max {:.2} px</text>\n",
        margin + 4.0,
        margin - 6.0,
        max_err
    ));
    out.push_str("</svg>\n");
    Ok(out)
}
