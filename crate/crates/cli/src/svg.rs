//! Minimal standalone SVG plots: axes, shaded cells, polylines and a legend.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
    legend: Vec<(String, String)>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range,
            y_range,
            body: String::new(),
            legend: Vec::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        MARGIN_LEFT + (x - a) / (b - a) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        HEIGHT - MARGIN_BOTTOM - (y - a) / (b - a) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    /// Filled rectangle spanning data coordinates `[x0, x1] × [y0, y1]`.
    pub fn rect(&mut self, (x0, x1): (f64, f64), (y0, y1): (f64, f64), fill: &str) {
        let (a, b) = (self.px(x0), self.px(x1));
        let (c, d) = (self.py(y1), self.py(y0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{a:.2}" y="{c:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="none"/>"#,
            (b - a).max(0.0),
            (d - c).max(0.0)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, label: &str) {
        if points.is_empty() {
            return;
        }
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        self.legend_entry(label, stroke);
    }

    pub fn legend_entry(&mut self, label: &str, color: &str) {
        if !label.is_empty() && !self.legend.iter().any(|(l, _)| l == label) {
            self.legend.push((label.into(), color.into()));
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            escape(&self.title)
        );
        s.push_str(&self.body);

        let (x0, x1) = (self.px(self.x_range.0), self.px(self.x_range.1));
        let (y0, y1) = (self.py(self.y_range.0), self.py(self.y_range.1));
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for i in 0..=5 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * i as f64 / 5.0;
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * i as f64 / 5.0;
            let (tx, ty) = (self.px(fx), self.py(fy));
            let _ = writeln!(s, r#"<line x1="{tx:.2}" y1="{y0:.2}" x2="{tx:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(s, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{fx:.2}</text>"#, y0 + 20.0);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ty:.2}" x2="{x0:.2}" y2="{ty:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#, x0 - 8.0, ty + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        for (i, (label, color)) in self.legend.iter().enumerate() {
            let ly = MARGIN_TOP + 10.0 + 20.0 * i as f64;
            let lx = WIDTH - MARGIN_RIGHT + 15.0;
            let _ = writeln!(s, r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#, ly - 10.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 18.0, escape(label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
