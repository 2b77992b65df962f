//! Minimal static SVG line charts for response curves.

use std::fmt::Write;

use funcausal_core::ice::ResponseCurve;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const BIN_COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn polyline(svg: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, width: f64, dash: bool) {
    let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    let dash = if dash { " stroke-dasharray=\"6 4\"" } else { "" };
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"{dash} points=\"{}\"/>",
        pts.join(" ")
    );
}

/// Renders the aggregate curve, any per-bin curves and a shaded band.
pub fn render(curve: &ResponseCurve, title: &str) -> String {
    let xs = &curve.grid;
    let mut ys: Vec<f64> = curve.response.clone();
    if let Some(bins) = &curve.bins {
        ys.extend(bins.iter().flatten());
    }
    if let Some(b) = &curve.band {
        ys.extend(&b.lower);
        ys.extend(&b.upper);
    }
    let (mut y0, mut y1) = ys.iter().fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let margin = 0.05 * (y1 - y0);
    let f = Frame { x0: xs[0], x1: xs[xs.len() - 1], y0: y0 - margin, y1: y1 + margin };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        W / 2.0,
        escape(title)
    );
    // axes and zero line
    let _ = writeln!(
        svg,
        "<line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/><line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>",
        b = H - PAD,
        r = W - PAD
    );
    if f.y0 < 0.0 && f.y1 > 0.0 {
        let _ = writeln!(
            svg,
            "<line x1=\"{PAD}\" y1=\"{y:.2}\" x2=\"{r}\" y2=\"{y:.2}\" stroke=\"#999\" stroke-dasharray=\"2 3\"/>",
            y = f.py(0.0),
            r = W - PAD
        );
    }
    for (v, anchor_y) in [(f.y0, H - PAD), (f.y1, PAD)] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{:.3}</text>",
            PAD - 4.0,
            anchor_y,
            v
        );
    }
    for (v, anchor_x) in [(f.x0, PAD), (f.x1, W - PAD)] {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{:.3}</text>",
            anchor_x,
            H - PAD + 16.0,
            v
        );
    }
    if let Some(b) = &curve.band {
        let mut pts: Vec<String> = xs.iter().zip(&b.upper).map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        pts.extend(xs.iter().zip(&b.lower).rev().map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))));
        let _ = writeln!(svg, "<polygon fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\" points=\"{}\"/>", pts.join(" "));
    }
    if let Some(bins) = &curve.bins {
        for (k, b) in bins.iter().enumerate() {
            if let Some(bands) = &curve.bin_bands {
                let band = &bands[k];
                let mut pts: Vec<String> =
                    xs.iter().zip(&band.upper).map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
                pts.extend(xs.iter().zip(&band.lower).rev().map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))));
                let _ = writeln!(
                    svg,
                    "<polygon fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\" points=\"{}\"/>",
                    BIN_COLORS[k % BIN_COLORS.len()],
                    pts.join(" ")
                );
            }
            polyline(&mut svg, &f, xs, b, BIN_COLORS[k % BIN_COLORS.len()], 1.5, false);
        }
        polyline(&mut svg, &f, xs, &curve.response, "black", 2.0, true);
    } else {
        polyline(&mut svg, &f, xs, &curve.response, "black", 2.0, false);
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
