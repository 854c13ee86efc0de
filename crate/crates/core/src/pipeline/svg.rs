//! SVG 1.1 rendering of a scene and a reconstructed disk set.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::geometry::Curve;
use crate::prony::DiskSet;

const SAMPLES: usize = 400;
const WIDTH: f64 = 600.0;

struct Frame {
    min: C64,
    max: C64,
}

impl Frame {
    fn px(&self, z: C64) -> (f64, f64) {
        let span = (self.max.re - self.min.re).max(self.max.im - self.min.im);
        let k = WIDTH / span;
        ((z.re - self.min.re) * k, (self.max.im - z.im) * k)
    }

    fn len(&self, r: f64) -> f64 {
        r * WIDTH / (self.max.re - self.min.re).max(self.max.im - self.min.im)
    }
}

/// Boundaries in black, reconstructed disks in blue, every center as a red dot.
pub fn render(curves: &[Curve], disks: &DiskSet) -> String {
    let polys: Vec<Vec<C64>> = curves.iter().map(|c| c.polyline(SAMPLES)).collect();
    let mut min = C64::new(f64::INFINITY, f64::INFINITY);
    let mut max = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |z: C64, r: f64| {
        min.re = min.re.min(z.re - r);
        min.im = min.im.min(z.im - r);
        max.re = max.re.max(z.re + r);
        max.im = max.im.max(z.im + r);
    };
    for z in polys.iter().flatten() {
        grow(*z, 0.0);
    }
    for d in &disks.disks {
        if d.center.re.is_finite() && d.center.im.is_finite() {
            grow(d.center, d.radius);
        }
    }
    if !min.re.is_finite() {
        min = C64::new(-1.0, -1.0);
        max = C64::new(1.0, 1.0);
    }
    let pad = 0.05 * (max.re - min.re).max(max.im - min.im).max(1e-12);
    let frame = Frame {
        min: min - C64::new(pad, pad),
        max: max + C64::new(pad, pad),
    };
    let (w, _) = frame.px(frame.max);
    let (_, h) = frame.px(frame.min);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white"/>"#
    );
    for poly in &polys {
        let pts: Vec<String> = poly
            .iter()
            .map(|&z| {
                let (x, y) = frame.px(z);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    for d in disks.disks.iter().filter(|d| d.radius > 0.0) {
        let (x, y) = frame.px(d.center);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="rgb(70,110,220)" fill-opacity="0.35" stroke="rgb(40,70,180)" stroke-width="1"/>"#,
            frame.len(d.radius)
        );
    }
    for d in &disks.disks {
        let (x, y) = frame.px(d.center);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="2.5" fill="red"/>"#
        );
    }
    out.push_str("</svg>\n");
    out
}
