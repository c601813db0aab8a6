//! Deterministic SVG rendering: fixed canvas, axis scales derived from
//! data bounds rounded outward to two significant digits, inline styling
//! only, no external assets, no randomness.

/// Canvas width in pixels (fixed for every artifact).
pub const CANVAS_W: f64 = 900.0;
/// Canvas height in pixels (fixed for every artifact).
pub const CANVAS_H: f64 = 640.0;

const MARGIN_L: f64 = 84.0;
const MARGIN_R: f64 = 28.0;
const MARGIN_T: f64 = 52.0;
const MARGIN_B: f64 = 64.0;

/// Round `[lo, hi]` outward so both ends are multiples of a power of ten
/// one-tenth the decade of the span — i.e. bounds with two significant
/// digits of resolution. Degenerate spans are widened symmetrically first.
pub fn round_out(lo: f64, hi: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if hi - lo <= 0.0 {
        let pad = lo.abs().max(1.0) * 0.05;
        lo -= pad;
        hi += pad;
    }
    let span = hi - lo;
    let unit = 10.0f64.powi(span.log10().floor() as i32 - 1);
    (
        (lo / unit).floor() * unit,
        (hi / unit).ceil() * unit,
    )
}

/// Compact deterministic number formatting for labels.
pub fn fmt_label(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{x:.2e}");
    }
    let mut s = format!("{x:.4}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    s
}

fn fmt_px(x: f64) -> String {
    format!("{x:.2}")
}

/// Five-stop perceptual color ramp on `[0, 1]` (clamped outside).
pub fn color_ramp(x: f64) -> String {
    const STOPS: [(f64, [u8; 3]); 5] = [
        (0.00, [0x44, 0x01, 0x54]),
        (0.25, [0x3b, 0x52, 0x8b]),
        (0.50, [0x21, 0x91, 0x8c]),
        (0.75, [0x5e, 0xc9, 0x62]),
        (1.00, [0xfd, 0xe7, 0x25]),
    ];
    let x = x.clamp(0.0, 1.0);
    let mut rgb = STOPS[4].1;
    for w in STOPS.windows(2) {
        let ((x0, c0), (x1, c1)) = (w[0], w[1]);
        if x <= x1 {
            let s = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            rgb = [0, 1, 2].map(|k| {
                (c0[k] as f64 + s * (c1[k] as f64 - c0[k] as f64)).round() as u8
            });
            break;
        }
    }
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

struct Series {
    pts: Vec<(f64, f64)>,
    stroke: String,
    dash: Option<String>,
    label: String,
}

/// Line plot with axes, ticks, and a legend, on the fixed canvas.
pub struct LinePlot {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LinePlot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
        }
    }

    /// Add a solid polyline.
    pub fn line(&mut self, pts: &[(f64, f64)], stroke: &str, label: &str) -> &mut Self {
        self.series.push(Series {
            pts: pts.to_vec(),
            stroke: stroke.to_string(),
            dash: None,
            label: label.to_string(),
        });
        self
    }

    /// Add a dashed polyline (reference curves).
    pub fn dashed(&mut self, pts: &[(f64, f64)], stroke: &str, label: &str) -> &mut Self {
        self.series.push(Series {
            pts: pts.to_vec(),
            stroke: stroke.to_string(),
            dash: Some("6 4".to_string()),
            label: label.to_string(),
        });
        self
    }

    /// Render to a standalone SVG document string.
    pub fn render(&self) -> String {
        let finite: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.pts.iter().copied())
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect();
        let (x0, x1) = round_out(
            finite.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            finite.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        );
        let (y0, y1) = round_out(
            finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        );
        let (w, h) = (CANVAS_W - MARGIN_L - MARGIN_R, CANVAS_H - MARGIN_T - MARGIN_B);
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * w;
        let py = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * h;
        let mut out = String::new();
        push_header(&mut out);
        out.push_str(&format!(
            "<text x=\"{}\" y=\"28\" font-family=\"monospace\" font-size=\"17\" \
             fill=\"#202020\">{}</text>\n",
            fmt_px(MARGIN_L),
            esc(&self.title)
        ));
        // Frame and ticks.
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
             stroke=\"#404040\" stroke-width=\"1\"/>\n",
            fmt_px(MARGIN_L),
            fmt_px(MARGIN_T),
            fmt_px(w),
            fmt_px(h)
        ));
        for k in 0..=5 {
            let fx = x0 + (x1 - x0) * k as f64 / 5.0;
            let fy = y0 + (y1 - y0) * k as f64 / 5.0;
            let (tx, ty) = (px(fx), py(fy));
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#404040\"/>\n",
                fmt_px(tx),
                fmt_px(MARGIN_T + h),
                fmt_px(MARGIN_T + h + 6.0)
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" \
                 fill=\"#202020\" text-anchor=\"middle\">{}</text>\n",
                fmt_px(tx),
                fmt_px(MARGIN_T + h + 20.0),
                fmt_label(fx)
            ));
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#404040\"/>\n",
                fmt_px(MARGIN_L - 6.0),
                fmt_px(MARGIN_L),
                fmt_px(ty)
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" \
                 fill=\"#202020\" text-anchor=\"end\">{}</text>\n",
                fmt_px(MARGIN_L - 10.0),
                fmt_px(ty + 4.0),
                fmt_label(fy)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" \
             fill=\"#202020\" text-anchor=\"middle\">{}</text>\n",
            fmt_px(MARGIN_L + w / 2.0),
            fmt_px(CANVAS_H - 18.0),
            esc(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"20\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" \
             fill=\"#202020\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
            fmt_px(MARGIN_T + h / 2.0),
            fmt_px(MARGIN_T + h / 2.0),
            esc(&self.y_label)
        ));
        // Series, clipped to the frame.
        out.push_str(&format!(
            "<clipPath id=\"frame\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>\n",
            fmt_px(MARGIN_L),
            fmt_px(MARGIN_T),
            fmt_px(w),
            fmt_px(h)
        ));
        out.push_str("<g clip-path=\"url(#frame)\">\n");
        for s in &self.series {
            let coords: Vec<String> = s
                .pts
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|p| format!("{},{}", fmt_px(px(p.0)), fmt_px(py(p.1))))
                .collect();
            let dash = s
                .dash
                .as_ref()
                .map(|d| format!(" stroke-dasharray=\"{d}\""))
                .unwrap_or_default();
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{}/>\n",
                coords.join(" "),
                s.stroke,
                dash
            ));
        }
        out.push_str("</g>\n");
        // Legend.
        for (k, s) in self.series.iter().filter(|s| !s.label.is_empty()).enumerate() {
            let ly = MARGIN_T + 16.0 + 18.0 * k as f64;
            let dash = s
                .dash
                .as_ref()
                .map(|d| format!(" stroke-dasharray=\"{d}\""))
                .unwrap_or_default();
            out.push_str(&format!(
                "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{3}\" \
                 stroke-width=\"1.6\"{4}/>\n",
                fmt_px(MARGIN_L + w - 180.0),
                fmt_px(MARGIN_L + w - 150.0),
                fmt_px(ly),
                s.stroke,
                dash
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" \
                 fill=\"#202020\">{}</text>\n",
                fmt_px(MARGIN_L + w - 142.0),
                fmt_px(ly + 4.0),
                esc(&s.label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Map of filled polygons in data coordinates (y up), aspect-preserving.
pub struct PolygonMap {
    title: String,
    polys: Vec<(Vec<(f64, f64)>, String)>,
}

impl PolygonMap {
    pub fn new(title: &str) -> Self {
        PolygonMap { title: title.to_string(), polys: Vec::new() }
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], fill: &str) -> &mut Self {
        self.polys.push((pts.to_vec(), fill.to_string()));
        self
    }

    /// Render to a standalone SVG document string.
    pub fn render(&self) -> String {
        let all: Vec<(f64, f64)> = self.polys.iter().flat_map(|p| p.0.iter().copied()).collect();
        let (x0, x1) = round_out(
            all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        );
        let (y0, y1) = round_out(
            all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        );
        let (w, h) = (CANVAS_W - MARGIN_L - MARGIN_R, CANVAS_H - MARGIN_T - MARGIN_B);
        let s = (w / (x1 - x0)).min(h / (y1 - y0));
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        let (mx, my) = (MARGIN_L + w / 2.0, MARGIN_T + h / 2.0);
        let px = |x: f64| mx + (x - cx) * s;
        let py = |y: f64| my - (y - cy) * s;
        let mut out = String::new();
        push_header(&mut out);
        out.push_str(&format!(
            "<text x=\"{}\" y=\"28\" font-family=\"monospace\" font-size=\"17\" \
             fill=\"#202020\">{}</text>\n",
            fmt_px(MARGIN_L),
            esc(&self.title)
        ));
        for (pts, fill) in &self.polys {
            let coords: Vec<String> = pts
                .iter()
                .map(|p| format!("{},{}", fmt_px(px(p.0)), fmt_px(py(p.1))))
                .collect();
            out.push_str(&format!(
                "<polygon points=\"{}\" fill=\"{}\" stroke=\"#303030\" stroke-width=\"0.3\"/>\n",
                coords.join(" "),
                fill
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn push_header(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" \
         viewBox=\"0 0 {0} {1}\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
        CANVAS_W as u32, CANVAS_H as u32
    ));
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_round_outward_to_two_significant_digits() {
        assert_eq!(round_out(0.13, 9.87), (0.1, 9.9));
        assert_eq!(round_out(-3.2, 11.0), (-4.0, 11.0));
        let (lo, hi) = round_out(5.0, 5.0);
        assert!(lo < 5.0 && hi > 5.0);
        // Reversed inputs are normalized.
        assert_eq!(round_out(9.87, 0.13), (0.1, 9.9));
    }

    #[test]
    fn labels_are_compact_and_deterministic() {
        assert_eq!(fmt_label(0.0), "0");
        assert_eq!(fmt_label(2.5), "2.5");
        assert_eq!(fmt_label(-4.0), "-4");
        assert_eq!(fmt_label(12345.678), "1.23e4");
        assert_eq!(fmt_label(1.0e-7), "1.00e-7");
    }

    #[test]
    fn ramp_hits_anchor_colors_and_clamps() {
        assert_eq!(color_ramp(0.0), "#440154");
        assert_eq!(color_ramp(1.0), "#fde725");
        assert_eq!(color_ramp(-3.0), "#440154");
        assert_eq!(color_ramp(7.0), "#fde725");
        assert_eq!(color_ramp(0.5), "#21918c");
    }

    #[test]
    fn rendering_is_deterministic_and_self_contained() {
        let pts: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, (i as f64 * 0.3).sin())).collect();
        let mut plot = LinePlot::new("wave", "t", "u");
        plot.line(&pts, "#3b528b", "signal").dashed(&pts, "#a03030", "ref");
        let a = plot.render();
        let b = plot.render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg xmlns"));
        assert!(a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(!a.contains("http://") || a.contains("http://www.w3.org"));

        let mut map = PolygonMap::new("cells");
        map.polygon(&[(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)], "#9aa0a6");
        map.polygon(&[(2.0, 0.0), (3.0, 0.0), (2.5, 1.0)], "#101010");
        let m = map.render();
        assert_eq!(m, map.render());
        assert_eq!(m.matches("<polygon").count(), 2);
    }
}
