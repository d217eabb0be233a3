//! Minimal self-contained SVG renderers: no external plotting dependency,
//! every plot ships next to the CSV that holds the underlying numbers.

use crate::stats::Histogram2d;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi <= lo {
        return (lo - 0.5, lo + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn frame_and_labels(f: &Frame, x_label: &str, y_label: &str, title: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        MARGIN,
        MARGIN,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    for k in 0..=4 {
        let x = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let y = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{:.3e}</text>\n",
            f.px(x),
            H - MARGIN + 16.0,
            x
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.2e}</text>\n",
            MARGIN - 6.0,
            f.py(y) + 4.0,
            y
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n",
        W / 2.0,
        H - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
        H / 2.0,
        H / 2.0
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    s
}

/// Polyline chart of one or more (label, points) series.
pub fn line_chart(
    series: &[(&str, &[(f64, f64)])],
    x_label: &str,
    y_label: &str,
    title: &str,
) -> String {
    const COLORS: [&str; 5] = ["#c23b22", "#1f77b4", "#777777", "#2ca02c", "#9467bd"];
    let f = Frame {
        x0: axis_range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0))).0,
        x1: axis_range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0))).1,
        y0: axis_range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1))).0,
        y1: axis_range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1))).1,
    };
    let mut s = header();
    s.push_str(&frame_and_labels(&f, x_label, y_label, title));
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> =
            pts.iter().map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y))).collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN - 150.0,
            MARGIN + 18.0 + 16.0 * i as f64
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Phase-space panel: 2D histogram heat map with the position marginal and a
/// Gaussian overlay of the quoted standard deviation on top.
pub fn histogram_panel(h: &Histogram2d, sigma: f64, title: &str) -> String {
    let f = Frame {
        x0: h.x_edges[0],
        x1: h.x_edges[h.x_edges.len() - 1],
        y0: h.y_edges[0],
        y1: h.y_edges[h.y_edges.len() - 1],
    };
    let max_count = h.counts.iter().flatten().copied().max().unwrap_or(1).max(1);
    let mut s = header();
    s.push_str(&frame_and_labels(&f, "position (m)", "momentum / m\u{03a9} (m)", title));
    for (ix, col) in h.counts.iter().enumerate() {
        for (iy, c) in col.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let frac = *c as f64 / max_count as f64;
            let shade = (255.0 - 215.0 * frac) as u8;
            s.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"rgb({shade},{},255)\"/>\n",
                f.px(h.x_edges[ix]),
                f.py(h.y_edges[iy + 1]),
                f.px(h.x_edges[ix + 1]) - f.px(h.x_edges[ix]),
                f.py(h.y_edges[iy]) - f.py(h.y_edges[iy + 1]),
                shade.saturating_add(20)
            ));
        }
    }
    // position marginal above the frame
    let col_sums: Vec<u64> = h.counts.iter().map(|c| c.iter().sum()).collect();
    let max_sum = col_sums.iter().copied().max().unwrap_or(1).max(1) as f64;
    let band = MARGIN * 0.7;
    for (ix, c) in col_sums.iter().enumerate() {
        let height = band * *c as f64 / max_sum;
        s.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#bbbbbb\"/>\n",
            f.px(h.x_edges[ix]),
            MARGIN - height,
            f.px(h.x_edges[ix + 1]) - f.px(h.x_edges[ix]),
            height
        ));
    }
    // Gaussian overlay with the reported sigma, normalized to the marginal peak
    if sigma > 0.0 {
        let mean = 0.5 * (f.x0 + f.x1);
        let pts: Vec<String> = (0..=160)
            .map(|i| {
                let x = f.x0 + (f.x1 - f.x0) * i as f64 / 160.0;
                let g = (-(x - mean) * (x - mean) / (2.0 * sigma * sigma)).exp();
                format!("{:.2},{:.2}", f.px(x), MARGIN - band * g)
            })
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c23b22\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_is_well_formed() {
        let pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, (i as f64).sin())).collect();
        let svg = line_chart(&[("sin", &pts)], "t", "y", "demo");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn histogram_panel_renders_counts() {
        let h = Histogram2d {
            x_edges: vec![0.0, 1.0, 2.0],
            y_edges: vec![0.0, 1.0],
            counts: vec![vec![3], vec![5]],
        };
        let svg = histogram_panel(&h, 0.5, "panel");
        assert!(svg.contains("rect"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
