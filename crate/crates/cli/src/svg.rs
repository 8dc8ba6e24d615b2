//! Minimal static SVG 1.1 writer for line and scatter figures.

use std::fmt::Write;

pub type Bounds = (f64, f64, f64, f64);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bounding box of `points`, padded by `pad` of its extent on every side.
pub fn bounds_of(points: impl IntoIterator<Item = (f64, f64)>, pad: f64) -> Bounds {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let dx = (x1 - x0).max(1e-12) * pad;
    let dy = (y1 - y0).max(1e-12) * pad;
    (x0 - dx, x1 + dx, y0 - dy, y1 + dy)
}

/// Five-stop blue-to-yellow ramp; `t` is clamped to [0, 1].
pub fn colormap(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (STOPS.len() - 1) as f64;
    let k = (s.floor() as usize).min(STOPS.len() - 2);
    let f = s - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let c = |u: f64, v: f64| (u + f * (v - u)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

pub struct Canvas {
    width: f64,
    height: f64,
    margin: f64,
    bounds: Bounds,
    body: String,
}

impl Canvas {
    /// A `width` × `height` pixel figure showing `bounds`; with
    /// `equal_aspect` the bounds grow so one unit is the same length on both
    /// axes.
    pub fn new(width: f64, height: f64, bounds: Bounds, equal_aspect: bool) -> Self {
        let margin = 50.0;
        let (mut x0, mut x1, mut y0, mut y1) = bounds;
        if equal_aspect {
            let sx = (x1 - x0) / (width - 2.0 * margin);
            let sy = (y1 - y0) / (height - 2.0 * margin);
            let s = sx.max(sy);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            x0 = cx - 0.5 * s * (width - 2.0 * margin);
            x1 = cx + 0.5 * s * (width - 2.0 * margin);
            y0 = cy - 0.5 * s * (height - 2.0 * margin);
            y1 = cy + 0.5 * s * (height - 2.0 * margin);
        }
        Canvas { width, height, margin, bounds: (x0, x1, y0, y1), body: String::new() }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.bounds;
        let px = self.margin + (x - x0) / (x1 - x0) * (self.width - 2.0 * self.margin);
        let py = self.height - self.margin - (y - y0) / (y1 - y0) * (self.height - 2.0 * self.margin);
        (px, py)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, closed: bool) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (k, &(x, y)) in points.iter().enumerate() {
            let (px, py) = self.map(x, y);
            let _ = write!(d, "{}{px:.2},{py:.2}", if k == 0 { "M" } else { " L" });
        }
        if closed {
            d.push_str(" Z");
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}" stroke-linejoin="round"/>"#
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, radius_px: f64, fill: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(self.body, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{radius_px}" fill="{fill}"/>"#);
    }

    /// Text at data coordinates.
    pub fn label(&mut self, x: f64, y: f64, text: &str, size: f64) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.body,
            r#"<text x="{px:.2}" y="{py:.2}" font-family="sans-serif" font-size="{size}">{}</text>"#,
            escape(text)
        );
    }

    /// Frame with the extreme values written at the corners.
    pub fn frame(&mut self, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = self.bounds;
        let (m, w, h) = (self.margin, self.width, self.height);
        let _ = writeln!(
            self.body,
            r##"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="#444" stroke-width="1"/>"##,
            w - 2.0 * m,
            h - 2.0 * m
        );
        let t = |s: &mut String, x: f64, y: f64, anchor: &str, text: String| {
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
                escape(&text)
            );
        };
        t(&mut self.body, m, h - m + 15.0, "start", format!("{x0:.3}"));
        t(&mut self.body, w - m, h - m + 15.0, "end", format!("{x1:.3}"));
        t(&mut self.body, m - 5.0, h - m, "end", format!("{y0:.3}"));
        t(&mut self.body, m - 5.0, m + 10.0, "end", format!("{y1:.3}"));
        t(&mut self.body, 0.5 * w, h - m + 30.0, "middle", xlabel.to_string());
        t(&mut self.body, 15.0, 0.5 * h, "middle", ylabel.to_string());
    }

    pub fn finish(self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(s, "<title>{}</title>", escape(title));
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="25" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            0.5 * self.width,
            escape(title)
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), "#440154");
        assert_eq!(colormap(1.0), "#fde725");
        assert_eq!(colormap(2.0), colormap(1.0));
        assert_eq!(colormap(f64::NAN), colormap(0.0));
    }

    #[test]
    fn canvas_maps_corners_and_escapes() {
        let mut c = Canvas::new(400.0, 300.0, (0.0, 1.0, 0.0, 1.0), false);
        assert_eq!(c.map(0.0, 0.0), (50.0, 250.0));
        assert_eq!(c.map(1.0, 1.0), (350.0, 50.0));
        c.polyline(&[(0.0, 0.0), (1.0, 1.0)], "black", 1.0, true);
        c.label(0.5, 0.5, "a<b & c", 10.0);
        let s = c.finish("t");
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("M50.00,250.00 L350.00,50.00 Z"));
        assert!(s.contains("a&lt;b &amp; c"));
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn equal_aspect_expands_short_side() {
        let c = Canvas::new(500.0, 300.0, (-1.0, 1.0, -1.0, 1.0), true);
        let (x0, x1, y0, y1) = c.bounds;
        assert!(((x1 - x0) / 400.0 - (y1 - y0) / 200.0).abs() < 1e-12);
        assert!(y1 - y0 >= 2.0 - 1e-12);
    }

    #[test]
    fn bounds_padding() {
        let b = bounds_of([(0.0, 0.0), (2.0, 1.0)], 0.1);
        assert_eq!(b, (-0.2, 2.2, -0.1, 1.1));
        assert_eq!(bounds_of(std::iter::empty(), 0.1), (0.0, 1.0, 0.0, 1.0));
    }
}
