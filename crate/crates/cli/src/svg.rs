//! Minimal dependency-free SVG plotting: line, bar and scatter panels.

use std::fmt::Write as _;

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 44.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone)]
pub enum Series {
    Line {
        points: Vec<(f64, f64)>,
    },
    Scatter {
        points: Vec<(f64, f64)>,
    },
    Bars {
        values: Vec<f64>,
    },
    /// Dashed grey polyline, for reference curves.
    Dashed {
        points: Vec<(f64, f64)>,
    },
    /// Highlighted point drawn as a labelled star.
    Marker {
        x: f64,
        y: f64,
        label: String,
    },
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub log_y: bool,
    /// Horizontal dashed reference lines.
    pub reference_lines: Vec<f64>,
}

impl Panel {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Panel {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            log_y: false,
            reference_lines: Vec::new(),
        }
    }

    pub fn with_series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with_reference(mut self, y: f64) -> Self {
        self.reference_lines.push(y);
        self
    }

    fn ty(&self, y: f64) -> Option<f64> {
        if self.log_y {
            (y > 0.0 && y.is_finite()).then(|| y.log10())
        } else {
            y.is_finite().then_some(y)
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
        let mut push = |x: f64, y: Option<f64>| {
            if let Some(y) = y {
                xs = (xs.0.min(x), xs.1.max(x));
                ys = (ys.0.min(y), ys.1.max(y));
            }
        };
        for s in &self.series {
            match s {
                Series::Line { points }
                | Series::Scatter { points }
                | Series::Dashed { points } => {
                    for &(x, y) in points {
                        push(x, self.ty(y));
                    }
                }
                Series::Marker { x, y, .. } => push(*x, self.ty(*y)),
                Series::Bars { values } => {
                    for (i, &v) in values.iter().enumerate() {
                        push(i as f64 - 0.5, self.ty(v));
                        push(i as f64 + 0.5, self.ty(v));
                    }
                    if !self.log_y {
                        push(0.0, Some(0.0));
                    }
                }
            }
        }
        for &r in &self.reference_lines {
            if let Some(y) = self.ty(r) {
                ys = (ys.0.min(y), ys.1.max(y));
            }
        }
        if !xs.0.is_finite() {
            xs = (0.0, 1.0);
            ys = (0.0, 1.0);
        }
        if xs.1 - xs.0 <= 0.0 {
            xs = (xs.0 - 0.5, xs.1 + 0.5);
        }
        if ys.1 - ys.0 <= 0.0 {
            ys = (ys.0 - 0.5, ys.1 + 0.5);
        }
        let pad = 0.05 * (ys.1 - ys.0);
        (xs.0, xs.1, ys.0 - pad, ys.1 + pad)
    }

    fn path_data(
        &self,
        points: &[(f64, f64)],
        sx: &dyn Fn(f64) -> f64,
        sy: &dyn Fn(f64) -> f64,
    ) -> String {
        let mut d = String::new();
        for &(x, y) in points {
            if let Some(y) = self.ty(y) {
                let cmd = if d.is_empty() { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        d.truncate(d.trim_end().len());
        d
    }

    fn render(&self, out: &mut String, ox: f64, oy: f64) {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = PANEL_W - MARGIN_L - MARGIN_R;
        let ph = PANEL_H - MARGIN_T - MARGIN_B;
        let sx = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| oy + MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##,
            ox + MARGIN_L,
            oy + MARGIN_T
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy + 20.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            ox + MARGIN_L + pw / 2.0,
            oy + PANEL_H - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            ox + 14.0,
            oy + MARGIN_T + ph / 2.0,
            ox + 14.0,
            oy + MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let label_y = if self.log_y {
                format!("1e{fy:.1}")
            } else {
                tick(fy)
            };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                sx(fx),
                oy + MARGIN_T + ph + 14.0,
                tick(fx)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
                ox + MARGIN_L - 4.0,
                sy(fy) + 3.0,
                label_y
            );
        }
        for &r in &self.reference_lines {
            if let Some(y) = self.ty(r) {
                let _ = writeln!(
                    out,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="6,4"/>"##,
                    sx(x0),
                    sy(y),
                    sx(x1),
                    sy(y)
                );
            }
        }
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            match s {
                Series::Line { points } => {
                    let d = self.path_data(points, &sx, &sy);
                    let _ = writeln!(
                        out,
                        r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#
                    );
                }
                Series::Scatter { points } => {
                    for &(x, y) in points {
                        if let Some(y) = self.ty(y) {
                            let _ = writeln!(
                                out,
                                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                                sx(x),
                                sy(y)
                            );
                        }
                    }
                }
                Series::Dashed { points } => {
                    let d = self.path_data(points, &sx, &sy);
                    let _ = writeln!(
                        out,
                        r##"<path d="{d}" fill="none" stroke="#555" stroke-dasharray="2,3"/>"##
                    );
                }
                Series::Marker { x, y, label } => {
                    if let Some(y) = self.ty(*y) {
                        let _ = writeln!(
                            out,
                            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="18" fill="#d62728">*</text>"##,
                            sx(*x),
                            sy(y) + 6.0
                        );
                        let _ = writeln!(
                            out,
                            r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
                            sx(*x) + 8.0,
                            sy(y) - 4.0,
                            escape(label)
                        );
                    }
                }
                Series::Bars { values } => {
                    let base = if self.log_y { y0 } else { 0.0f64.max(y0) };
                    for (i, &v) in values.iter().enumerate() {
                        if let Some(y) = self.ty(v) {
                            let left = sx(i as f64 - 0.4);
                            let right = sx(i as f64 + 0.4);
                            let top = sy(y).min(sy(base));
                            let h = (sy(y) - sy(base)).abs();
                            let _ = writeln!(
                                out,
                                r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{h:.2}" fill="{color}"/>"#,
                                right - left
                            );
                        }
                    }
                }
            }
        }
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.2}")
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders panels on a grid with `columns` panels per row.
pub fn figure(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let width = PANEL_W * columns.min(panels.len().max(1)) as f64;
    let height = PANEL_H * rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        let ox = PANEL_W * (k % columns) as f64;
        let oy = PANEL_H * (k / columns) as f64;
        p.render(&mut out, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_series_kinds() {
        let p = Panel::new("a<b", "t", "x")
            .with_series(Series::Line {
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            })
            .with_series(Series::Scatter {
                points: vec![(0.5, 1.5)],
            })
            .with_reference(1.75);
        let b = Panel::new("bars", "agent", "x").with_series(Series::Bars {
            values: vec![1.0, 0.0, 3.0],
        });
        let svg = figure(&[p, b], 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<path"));
        assert!(svg.contains("<circle"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("a&lt;b"));
        let s = Panel::new("sweep", "x", "y")
            .with_series(Series::Dashed {
                points: vec![(0.0, 0.0), (1.0, 1.0)],
            })
            .with_series(Series::Marker {
                x: 0.5,
                y: 0.5,
                label: "base".into(),
            });
        let svg2 = figure(&[s], 1);
        assert!(svg2.contains("stroke-dasharray=\"2,3\""));
        assert!(svg2.contains(">*</text>"));
        assert_eq!(svg.matches("<rect").count(), 1 + 2 + 3);
    }

    #[test]
    fn log_axis_skips_nonpositive_values() {
        let p = Panel::new("h", "t", "H").log_y().with_series(Series::Line {
            points: vec![(0.0, 1.0), (1.0, 0.0), (2.0, 1e-6)],
        });
        let svg = figure(&[p], 1);
        let path = svg.lines().find(|l| l.starts_with("<path")).unwrap();
        assert_eq!(path.matches('L').count() + path.matches('M').count(), 2);
    }

    #[test]
    fn empty_panel_is_well_formed() {
        let svg = figure(&[Panel::new("empty", "x", "y")], 1);
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("NaN"));
    }
}
