//! Static plots: SVG line charts and PNG heat maps.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::torus::ScalarField;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl LineChart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn series(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
        });
        self
    }

    fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let tx = if self.log_x { x.log10() } else { x };
        let ty = if self.log_y { y.log10() } else { y };
        (tx.is_finite() && ty.is_finite()).then_some((tx, ty))
    }

    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter_map(|&(x, y)| self.map(x, y)))
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
            (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            ),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let tick = |v: f64, log: bool| {
            if log {
                format!("{:.3e}", 10f64.powf(v))
            } else {
                format!("{v:.4}")
            }
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
            m = MARGIN,
            t = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(fx),
                HEIGHT - MARGIN + 16.0,
                tick(fx, self.log_x)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                sy(fy) + 4.0,
                tick(fy, self.log_y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter_map(|&(x, y)| self.map(x, y))
                .enumerate()
                .map(|(k, (x, y))| {
                    format!(
                        "{}{:.2} {:.2}",
                        if k == 0 { "M" } else { "L" },
                        sx(x),
                        sy(y)
                    )
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<path d="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
                path.join(" ")
            );
            for (x, y) in series.points.iter().filter_map(|&(x, y)| self.map(x, y)) {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    sx(x),
                    sy(y)
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 140.0,
                MARGIN + 16.0 * i as f64,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_svg())?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Blue-white-red ramp on `t ∈ [0, 1]`.
fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let u = t / 0.5;
        (u, u, 1.0)
    } else {
        let u = (t - 0.5) / 0.5;
        (1.0, 1.0 - u, 1.0 - u)
    };
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

/// Heat map of `field` with `y` pointing up; values clipped to the 1st and
/// 99th percentiles so a vortex singularity does not wash out the map.
pub fn save_heatmap(path: &Path, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    let mut sorted = field.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let lo = sorted[n / 100];
    let hi = sorted[(99 * n) / 100].max(lo + 1e-300);
    let img = image::RgbImage::from_fn(g.nx() as u32, g.ny() as u32, |i, j| {
        let v = field.at(i as usize, g.ny() - 1 - j as usize);
        image::Rgb(ramp((v - lo) / (hi - lo)))
    });
    img.save(path)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}
