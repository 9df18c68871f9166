//! SVG rendering of `ln |L(z) / L(beta)|` over a window with zero markers.
//!
//! Cells are quantized to 256 shades of a perceptually ordered palette and
//! runs of equal shade in a row are merged into one `<rect>`. All numbers are
//! printed with fixed precision, so the output is byte-stable.

use std::fmt::Write;

use lzeros::{ComplexTime, Rect, SurvivalAmplitude, ZeroSet};

/// Lower clamp of the color scale in `ln |L|`.
pub const LOG_FLOOR: f64 = -20.0;

const CELL: f64 = 2.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_TOP: f64 = 12.0;
const MARGIN_RIGHT: f64 = 12.0;
const MARGIN_BOTTOM: f64 = 40.0;

/// Dark to bright, luminance increasing.
const PALETTE: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    /// Open circle.
    Circle,
    /// Diagonal cross.
    Cross,
    /// Upright plus.
    Plus,
}

pub struct Layer<'a> {
    pub zeros: &'a ZeroSet,
    pub marker: Marker,
    pub color: &'a str,
    pub label: &'a str,
}

#[derive(Debug, Clone, Copy)]
pub struct Heatmap {
    pub rect: Rect,
    pub columns: usize,
    pub rows: usize,
    /// Plot `-beta` on the horizontal axis.
    pub mirror_beta: bool,
}

/// Shade index in `0..256` for a log-modulus, monotone and clamped.
pub fn shade(log_modulus: f64, floor: f64) -> u8 {
    if !log_modulus.is_finite() {
        return 0;
    }
    let x = ((log_modulus - floor) / -floor).clamp(0.0, 1.0);
    (x * 255.0).round() as u8
}

pub fn color(shade: u8) -> (u8, u8, u8) {
    let x = shade as f64 / 255.0 * (PALETTE.len() - 1) as f64;
    let i = (x.floor() as usize).min(PALETTE.len() - 2);
    let f = x - i as f64;
    let (a, b) = (PALETTE[i], PALETTE[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

impl Heatmap {
    fn plot_width(&self) -> f64 {
        self.columns as f64 * CELL
    }

    fn plot_height(&self) -> f64 {
        self.rows as f64 * CELL
    }

    fn x(&self, beta: f64) -> f64 {
        let r = &self.rect;
        let u = (beta - r.beta_min) / r.width();
        let u = if self.mirror_beta { 1.0 - u } else { u };
        MARGIN_LEFT + u * self.plot_width()
    }

    fn y(&self, t: f64) -> f64 {
        let r = &self.rect;
        MARGIN_TOP + (r.t_max - t) / r.height() * self.plot_height()
    }

    /// Shades by row from the top (largest `t`), cell centers sampled.
    pub fn shades<A: SurvivalAmplitude + ?Sized>(&self, amp: &A) -> Vec<Vec<u8>> {
        let r = &self.rect;
        (0..self.rows)
            .map(|row| {
                let t = r.t_max - (row as f64 + 0.5) / self.rows as f64 * r.height();
                (0..self.columns)
                    .map(|col| {
                        let mut u = (col as f64 + 0.5) / self.columns as f64;
                        if self.mirror_beta {
                            u = 1.0 - u;
                        }
                        let beta = r.beta_min + u * r.width();
                        let v = amp.amplitude_normalized(ComplexTime::new(beta, t));
                        shade(v.log_modulus, LOG_FLOOR)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn render<A: SurvivalAmplitude + ?Sized>(&self, amp: &A, layers: &[Layer<'_>]) -> String {
        let width = MARGIN_LEFT + self.plot_width() + MARGIN_RIGHT;
        let height = MARGIN_TOP + self.plot_height() + MARGIN_BOTTOM;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
        for (row, line) in self.shades(amp).iter().enumerate() {
            let y = MARGIN_TOP + row as f64 * CELL;
            let mut start = 0;
            while start < line.len() {
                let mut end = start + 1;
                while end < line.len() && line[end] == line[start] {
                    end += 1;
                }
                let (r, g, b) = color(line[start]);
                let _ = writeln!(
                    s,
                    r##"<rect x="{:.1}" y="{y:.1}" width="{:.1}" height="{CELL:.1}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                    MARGIN_LEFT + start as f64 * CELL,
                    (end - start) as f64 * CELL,
                );
                start = end;
            }
        }
        let _ = writeln!(s, "</g>");

        for layer in layers {
            let _ = writeln!(s, r#"<g class="{}" stroke="{}" fill="none" stroke-width="1">"#, layer.label, layer.color);
            for z in layer.zeros.iter().filter(|z| self.rect.contains(z.z)) {
                let (x, y) = (self.x(z.z.beta), self.y(z.z.t));
                match layer.marker {
                    Marker::Circle => {
                        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5"/>"#);
                    }
                    Marker::Cross => {
                        let _ = writeln!(
                            s,
                            r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}"/>"#,
                            x - 3.0, y - 3.0, x + 3.0, y + 3.0, x - 3.0, y + 3.0, x + 3.0, y - 3.0
                        );
                    }
                    Marker::Plus => {
                        let _ = writeln!(
                            s,
                            r#"<path d="M{:.2} {y:.2}L{:.2} {y:.2}M{x:.2} {:.2}L{x:.2} {:.2}"/>"#,
                            x - 3.5, x + 3.5, y - 3.5, y + 3.5
                        );
                    }
                }
            }
            let _ = writeln!(s, "</g>");
        }

        self.axes(&mut s);
        s.push_str("</svg>\n");
        s
    }

    fn axes(&self, s: &mut String) {
        let r = &self.rect;
        let (x0, x1) = (MARGIN_LEFT, MARGIN_LEFT + self.plot_width());
        let (y0, y1) = (MARGIN_TOP, MARGIN_TOP + self.plot_height());
        let _ = writeln!(
            s,
            r#"<g font-family="sans-serif" font-size="10" fill="black"><rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let beta = r.beta_min + f * r.width();
            let shown = if self.mirror_beta { -beta } else { beta };
            let x = self.x(beta);
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{shown:.3}</text>"#,
                y1 + 14.0
            );
            let t = r.t_min + f * r.height();
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t:.3}</text>"#,
                x0 - 4.0,
                self.y(t) + 3.5
            );
        }
        let label = if self.mirror_beta { "-beta" } else { "beta" };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
            0.5 * (x0 + x1),
            y1 + 32.0
        );
        let _ = writeln!(
            s,
            r#"<text x="12" y="{:.1}" text-anchor="middle" transform="rotate(-90 12 {:.1})">t</text></g>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1)
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lzeros::EnergyDistribution;

    #[test]
    fn shade_is_monotone_and_clamped() {
        let mut last = 0;
        for i in 0..=100 {
            let v = LOG_FLOOR - 5.0 + i as f64 * 0.3;
            let s = shade(v, LOG_FLOOR);
            assert!(s >= last);
            last = s;
        }
        assert_eq!(shade(LOG_FLOOR - 1.0, LOG_FLOOR), 0);
        assert_eq!(shade(0.0, LOG_FLOOR), 255);
        assert_eq!(shade(f64::NEG_INFINITY, LOG_FLOOR), 0);
    }

    #[test]
    fn palette_luminance_increases() {
        let lum = |(r, g, b): (u8, u8, u8)| 0.2126 * r as f64 + 0.7152 * g as f64 + 0.0722 * b as f64;
        for s in 1..=255u8 {
            assert!(lum(color(s)) >= lum(color(s - 1)) - 1.0, "shade {s}");
        }
    }

    #[test]
    fn two_level_minima_at_odd_multiples_of_pi() {
        let d = EnergyDistribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        // cell centers land on beta = 0 and t = 7 pi, 5 pi, 3 pi, pi
        let map = Heatmap {
            rect: Rect::new(-0.5, 0.5, 0.0, 8.0 * std::f64::consts::PI),
            columns: 9,
            rows: 4,
            mirror_beta: false,
        };
        let shades = map.shades(&d);
        let darkest: Vec<(usize, usize)> = shades
            .iter()
            .enumerate()
            .flat_map(|(r, line)| line.iter().enumerate().map(move |(c, &s)| (r, c, s)))
            .filter(|&(_, _, s)| s == 0)
            .map(|(r, c, _)| (r, c))
            .collect();
        assert_eq!(darkest, vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
    }

    #[test]
    fn mirrored_map_is_reflected() {
        let d = EnergyDistribution::new([(0.0, 0.7), (1.3, 0.2), (2.0, 0.1)]).unwrap();
        let rect = Rect::new(-1.0, 2.0, 0.0, 9.0);
        let plain = Heatmap { rect, columns: 12, rows: 5, mirror_beta: false }.shades(&d);
        let mirrored = Heatmap { rect, columns: 12, rows: 5, mirror_beta: true }.shades(&d);
        for (a, b) in plain.iter().zip(&mirrored) {
            let rev: Vec<u8> = b.iter().rev().copied().collect();
            assert_eq!(a, &rev);
        }
    }
}
