//! Just enough SVG for a line plot and a polygon outline.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// Affine map from data coordinates to the drawing area, y pointing up.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String) {
        let (l, r) = (MARGIN, WIDTH - MARGIN);
        let (t, b) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{l}" y="{}" text-anchor="middle">{}</text>"#,
            b + 20.0,
            label(self.x0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{r}" y="{}" text-anchor="middle">{}</text>"#,
            b + 20.0,
            label(self.x1)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{b}" text-anchor="end">{}</text>"#,
            l - 6.0,
            label(self.y0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            l - 6.0,
            t + 5.0,
            label(self.y1)
        );
    }
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn label(v: f64) -> String {
    format!("{v:.6}")
}

fn document(body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n{body}</svg>\n"
    )
}

/// Polyline through `points` on linear axes, with min/max tick labels.
pub fn line_plot(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let frame = Frame::new(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut body = String::new();
    frame.axes(&mut body);
    let _ = writeln!(
        body,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        body,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        body,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
    document(&body)
}

/// Closed polygon plus vertical segments at the given x positions, clipped
/// to the polygon's fiber by `fiber(x) -> (bottom, top)`.
pub fn outline(
    vertices: &[(f64, f64)],
    dividers: &[f64],
    fiber: impl Fn(f64) -> Option<(f64, f64)>,
) -> String {
    let frame = Frame::new(vertices.iter().map(|p| p.0), vertices.iter().map(|p| p.1));
    let mut body = String::new();
    frame.axes(&mut body);
    let coords: Vec<String> = vertices
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        body,
        r#"<polygon points="{}" fill="lavender" stroke="black"/>"#,
        coords.join(" ")
    );
    for &x in dividers {
        if let Some((lo, hi)) = fiber(x) {
            let _ = writeln!(
                body,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
                frame.px(x),
                frame.py(lo),
                frame.py(hi)
            );
        }
    }
    document(&body)
}
