//! Minimal SVG emission: heatmaps of node fields and line plots.

use std::fmt::Write;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Blue to red ramp on `s in [0, 1]`.
fn colour(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let r = (255.0 * s) as u8;
    let b = (255.0 * (1.0 - s)) as u8;
    let g = (255.0 * (1.0 - (2.0 * s - 1.0).abs()) * 0.8) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of a row-major `rows x cols` field.
pub fn heatmap(title: &str, rows: usize, cols: usize, values: &[f64]) -> String {
    let mut out = header(&format!("{title} (rows = tau, cols = t)"));
    let (lo, hi) = range(values.iter().copied());
    let cw = (WIDTH - 2.0 * MARGIN) / cols.max(1) as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / rows.max(1) as f64;
    for r in 0..rows {
        for c in 0..cols {
            let v = values[r * cols + c];
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                MARGIN + c as f64 * cw,
                MARGIN + r as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                colour((v - lo) / (hi - lo))
            );
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\">min {lo:.3e}  max {hi:.3e}</text>",
        HEIGHT - 12.0
    );
    out + "</svg>\n"
}

/// Polylines over a shared x axis; `log_y` plots `log10 |y|`.
pub fn lines(title: &str, series: &[(&str, Vec<(f64, f64)>)], log_y: bool) -> String {
    let mut out = header(title);
    let map_y = |y: f64| if log_y { y.abs().max(1e-300).log10() } else { y };
    let (x0, x1) = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.1.iter().map(|p| map_y(p.1))));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (map_y(y) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let col = colour(if series.len() > 1 { k as f64 / (series.len() - 1) as f64 } else { 0.0 });
        let path: Vec<String> =
            pts.iter().filter(|p| p.1.is_finite()).map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{col}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
        let _ = writeln!(
            out,
            "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{col}\">{}</text>",
            WIDTH - MARGIN - 90.0,
            MARGIN + 14.0 * (k + 1) as f64,
            escape(name)
        );
    }
    let label = if log_y { "log10" } else { "y" };
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\">x {x0:.3} .. {x1:.3}; {label} {y0:.3} .. {y1:.3}</text>",
        HEIGHT - 12.0
    );
    out + "</svg>\n"
}
