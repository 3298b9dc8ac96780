//! Plain-text SVG plots. They are diagnostics only.

use std::fmt::Write;

use magwell::fieldlab::{MagneticField, Vec2};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

/// Maps data to the drawing area.
struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    log: [bool; 2],
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, log: [bool; 2], equal: bool) -> Option<Frame> {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (x, y) in points {
            for (k, v) in [x, y].into_iter().enumerate() {
                let v = if log[k] { v.log10() } else { v };
                if v.is_finite() {
                    lo[k] = lo[k].min(v);
                    hi[k] = hi[k].max(v);
                }
            }
        }
        if !(lo[0].is_finite() && lo[1].is_finite()) {
            return None;
        }
        for k in 0..2 {
            let pad = 0.05 * (hi[k] - lo[k]).max(1e-12);
            lo[k] -= pad;
            hi[k] += pad;
        }
        if equal {
            let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
            for k in 0..2 {
                let mid = 0.5 * (lo[k] + hi[k]);
                lo[k] = mid - 0.5 * span;
                hi[k] = mid + 0.5 * span;
            }
        }
        Some(Frame { lo, hi, log })
    }

    fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let t = |v: f64, k: usize| if self.log[k] { v.log10() } else { v };
        let (u, v) = (t(x, 0), t(y, 1));
        if !(u.is_finite() && v.is_finite()) {
            return None;
        }
        let px = MARGIN + (u - self.lo[0]) / (self.hi[0] - self.lo[0]) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (v - self.lo[1]) / (self.hi[1] - self.lo[1]) * (HEIGHT - 2.0 * MARGIN);
        Some((px, py))
    }

    fn axis_text(&self, out: &mut String, axes: &Axes) {
        let label = |v: f64, log: bool| {
            if log {
                format!("1e{v:.1}")
            } else {
                format!("{v:.3}")
            }
        };
        let _ = write!(
            out,
            r##"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="#444"/>
<text x="{cx}" y="30" text-anchor="middle" font-size="16">{title}</text>
<text x="{cx}" y="{by}" text-anchor="middle" font-size="13">{xl}</text>
<text x="18" y="{cy}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {cy})">{yl}</text>
<text x="{m}" y="{ty}" font-size="11">{x0}</text>
<text x="{xr}" y="{ty}" font-size="11" text-anchor="end">{x1}</text>
<text x="{lx}" y="{yb}" font-size="11" text-anchor="end">{y0}</text>
<text x="{lx}" y="{yt}" font-size="11" text-anchor="end">{y1}</text>
"##,
            m = MARGIN,
            w = WIDTH - 2.0 * MARGIN,
            h = HEIGHT - 2.0 * MARGIN,
            cx = WIDTH / 2.0,
            cy = HEIGHT / 2.0,
            by = HEIGHT - 15.0,
            ty = HEIGHT - MARGIN + 16.0,
            xr = WIDTH - MARGIN,
            lx = MARGIN - 4.0,
            yb = HEIGHT - MARGIN,
            yt = MARGIN + 10.0,
            title = escape(axes.title),
            xl = escape(axes.x_label),
            yl = escape(axes.y_label),
            x0 = label(self.lo[0], self.log[0]),
            x1 = label(self.hi[0], self.log[0]),
            y0 = label(self.lo[1], self.log[1]),
            y1 = label(self.hi[1], self.log[1]),
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn polyline(out: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str, width: f64) {
    let mut d = String::new();
    let mut pen_down = false;
    for &(x, y) in points {
        match frame.map(x, y) {
            Some((px, py)) => {
                let _ = write!(d, "{}{px:.2},{py:.2} ", if pen_down { "L" } else { "M" });
                pen_down = true;
            }
            None => pen_down = false,
        }
    }
    if !d.is_empty() {
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }
}

/// Line plot with markers; non-positive values are skipped on log axes.
pub fn line_plot(axes: &Axes, series: &[Series]) -> String {
    let mut out = header();
    let all = series.iter().flat_map(|s| s.points.iter().copied());
    let Some(frame) = Frame::fit(all, [axes.log_x, axes.log_y], false) else {
        out.push_str("</svg>\n");
        return out;
    };
    frame.axis_text(&mut out, axes);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        polyline(&mut out, &frame, &s.points, color, 1.5);
        for &(x, y) in &s.points {
            if let Some((px, py)) = frame.map(x, y) {
                let _ = writeln!(out, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="{color}"/>"#);
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-size="12" fill="{color}">{name}</text>"#,
            x = WIDTH - MARGIN - 150.0,
            y = MARGIN + 18.0 + 16.0 * i as f64,
            name = escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Segments of `{B = level}` inside the frame by marching squares.
fn contour(field: &MagneticField, lo: [f64; 2], hi: [f64; 2], level: f64, cells: usize) -> Vec<[Vec2; 2]> {
    let h = [(hi[0] - lo[0]) / cells as f64, (hi[1] - lo[1]) / cells as f64];
    let node = |i: usize, j: usize| [lo[0] + i as f64 * h[0], lo[1] + j as f64 * h[1]];
    let values: Vec<f64> = (0..=cells)
        .flat_map(|j| (0..=cells).map(move |i| (i, j)))
        .map(|(i, j)| field.eval(node(i, j)) - level)
        .collect();
    let at = |i: usize, j: usize| values[j * (cells + 1) + i];
    let mut segments = Vec::new();
    for j in 0..cells {
        for i in 0..cells {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut crossings = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                let (va, vb) = (at(a.0, a.1), at(b.0, b.1));
                if (va < 0.0) != (vb < 0.0) {
                    let t = va / (va - vb);
                    let (pa, pb) = (node(a.0, a.1), node(b.0, b.1));
                    crossings.push([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]);
                }
            }
            for pair in crossings.chunks_exact(2) {
                segments.push([pair[0], pair[1]]);
            }
        }
    }
    segments
}

/// Path in the `q` plane over level sets of `B`, with an optional second
/// path (guiding centre).
pub fn orbit_plot(title: &str, field: &MagneticField, path: &[Vec2], centers: &[Vec2], levels: &[f64]) -> String {
    let mut out = header();
    let pts = path.iter().chain(centers).map(|q| (q[0], q[1]));
    let Some(frame) = Frame::fit(pts, [false, false], true) else {
        out.push_str("</svg>\n");
        return out;
    };
    let axes = Axes {
        title,
        x_label: "q1",
        y_label: "q2",
        log_x: false,
        log_y: false,
    };
    frame.axis_text(&mut out, &axes);
    for level in levels {
        for seg in contour(field, frame.lo, frame.hi, *level, 120) {
            let pts = [(seg[0][0], seg[0][1]), (seg[1][0], seg[1][1])];
            polyline(&mut out, &frame, &pts, "#bbbbbb", 1.0);
        }
    }
    let orbit: Vec<(f64, f64)> = path.iter().map(|q| (q[0], q[1])).collect();
    polyline(&mut out, &frame, &orbit, COLORS[0], 0.6);
    let gc: Vec<(f64, f64)> = centers.iter().map(|q| (q[0], q[1])).collect();
    polyline(&mut out, &frame, &gc, COLORS[1], 1.5);
    out.push_str("</svg>\n");
    out
}
