//! Minimal static SVG line plots for the emitted tables.
//!
//! The CSV data is the contract; these renderings are a convenience for
//! eyeballing sweep results without external tooling.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 55.0;

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Renders one or more named series over a shared x axis.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    series: &[(String, Vec<f64>)],
) -> String {
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);

    let all_y: Vec<f64> = series
        .iter()
        .flat_map(|(_, ys)| ys.iter().copied())
        .filter(|y| y.is_finite())
        .collect();
    if xs.len() < 2 || all_y.is_empty() {
        svg.push_str("</svg>");
        return svg;
    }
    let (x_min, x_max) = bounds(xs);
    let (mut y_min, mut y_max) = bounds(&all_y);
    if (y_max - y_min).abs() < 1e-12 {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    // Axes and labels.
    let _ = write!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN,
    );
    let _ = write!(
        svg,
        r#"<text x="{tx}" y="22" font-size="15" text-anchor="middle">{title}</text>"#,
        tx = WIDTH / 2.0
    );
    let _ = write!(
        svg,
        r#"<text x="{tx}" y="{ty}" font-size="12" text-anchor="middle">{x_label}</text>"#,
        tx = WIDTH / 2.0,
        ty = HEIGHT - 12.0
    );
    let _ = write!(
        svg,
        r#"<text x="16" y="{ty}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {ty})">{y_label}</text>"#,
        ty = HEIGHT / 2.0
    );

    // Tick labels at the extremes.
    let _ = write!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="10" text-anchor="middle">{v:.3}</text>"#,
        x = sx(x_min),
        y = HEIGHT - MARGIN + 16.0,
        v = x_min
    );
    let _ = write!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="10" text-anchor="middle">{v:.3}</text>"#,
        x = sx(x_max),
        y = HEIGHT - MARGIN + 16.0,
        v = x_max
    );
    let _ = write!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="10" text-anchor="end">{v:.1}</text>"#,
        x = MARGIN - 6.0,
        y = sy(y_min) + 4.0,
        v = y_min
    );
    let _ = write!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="10" text-anchor="end">{v:.1}</text>"#,
        x = MARGIN - 6.0,
        y = sy(y_max) + 4.0,
        v = y_max
    );

    for (idx, (name, ys)) in series.iter().enumerate() {
        let color = SERIES_COLORS[idx % SERIES_COLORS.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        let _ = write!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let _ = write!(
            svg,
            r#"<text x="{x}" y="{y}" font-size="11" fill="{color}">{name}</text>"#,
            x = WIDTH - MARGIN + 4.0,
            y = MARGIN + 14.0 * idx as f64,
        );
    }
    svg.push_str("</svg>");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}
