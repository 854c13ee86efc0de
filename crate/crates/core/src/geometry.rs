//! Closed curves, cavity scenes and their trapezoidal boundary grids.
//!
//! Every curve is a 2π-periodic, counter-clockwise parameterization
//! `t ↦ x(t) ∈ ℂ`. A [`Scene`] holds one outer boundary and any number of
//! cavity boundaries; when the outer region is too large for the logarithmic
//! single layer to stay invertible, the scene is shrunk by an affine map that
//! is recorded so results can be mapped back.

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Number of polyline samples used by the validation checks.
const VALIDATION_SAMPLES: usize = 512;

/// Diameter the outer boundary is shrunk to when rescaling kicks in.
pub const RESCALE_TARGET_DIAMETER: f64 = 0.9;

/// Exterior conformal map `φ(ζ) = a₁ζ + a₀ + Σ_{k≥1} a₋ₖ ζ⁻ᵏ`.
///
/// The boundary is traced by `t ↦ φ(e^{it})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMap {
    /// Leading coefficient (the capacity), real and positive.
    pub a1: f64,
    /// Conformal centre.
    pub a0: C64,
    /// `negative[k-1] = a₋ₖ`.
    pub negative: Vec<C64>,
}

impl LaurentMap {
    pub fn new(a1: f64, a0: C64, negative: Vec<C64>) -> Result<Self> {
        if !(a1.is_finite() && a1 > 0.0) {
            return Err(Error::InvalidCurveParameters(format!(
                "laurent map needs a real a1 > 0, got {a1}"
            )));
        }
        if !a0.is_finite() || negative.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidCurveParameters(
                "laurent coefficients must be finite".into(),
            ));
        }
        Ok(Self { a1, a0, negative })
    }

    /// The map of a disk of radius `radius` centred at `center`.
    pub fn disk(center: C64, radius: f64) -> Self {
        Self {
            a1: radius,
            a0: center,
            negative: Vec::new(),
        }
    }

    /// Ellipse with semi-axes `a ≥ b`, rotated by `rotation`. The unit
    /// circle parameter is rotated too so that `a₁` stays real.
    pub fn ellipse(center: C64, a: f64, b: f64, rotation: f64) -> Self {
        Self {
            a1: 0.5 * (a + b),
            a0: center,
            negative: vec![C64::from_polar(0.5 * (a - b), 2.0 * rotation)],
        }
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        let inv = zeta.inv();
        let mut acc = self.a0 + zeta * self.a1;
        let mut pow = inv;
        for a in &self.negative {
            acc += a * pow;
            pow *= inv;
        }
        acc
    }

    fn derivatives(&self, t: f64) -> [C64; 3] {
        let e = C64::from_polar(1.0, t);
        let i = C64::i();
        let mut x = self.a0 + e * self.a1;
        let mut dx = i * e * self.a1;
        let mut ddx = -e * self.a1;
        for (j, a) in self.negative.iter().enumerate() {
            let k = (j + 1) as f64;
            let w = C64::from_polar(1.0, -k * t) * a;
            x += w;
            dx += -i * k * w;
            ddx += -k * k * w;
        }
        [x, dx, ddx]
    }
}

/// A smooth simple closed curve, oriented counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Circle {
        center: C64,
        radius: f64,
    },
    Ellipse {
        center: C64,
        semi_axes: (f64, f64),
        rotation: f64,
    },
    /// Four segments joined by quarter circles, traversed at constant speed.
    RoundedRectangle {
        center: C64,
        width: f64,
        height: f64,
        corner_radius: f64,
        rotation: f64,
    },
    /// `x(t) = cx + Σ aₖ cos kt + bₖ sin kt` (and likewise `y`), `k ≥ 1`.
    TrigPolynomial {
        center: C64,
        x: Vec<(f64, f64)>,
        y: Vec<(f64, f64)>,
    },
    LaurentMap(LaurentMap),
}

impl Curve {
    pub fn circle(center: C64, radius: f64) -> Self {
        Curve::Circle { center, radius }
    }

    pub fn ellipse(center: C64, a: f64, b: f64, rotation: f64) -> Self {
        Curve::Ellipse {
            center,
            semi_axes: (a, b),
            rotation,
        }
    }

    /// Rounded rectangle; `corner_radius = None` uses 10% of the shorter side.
    pub fn rounded_rectangle(
        center: C64,
        width: f64,
        height: f64,
        corner_radius: Option<f64>,
        rotation: f64,
    ) -> Self {
        Curve::RoundedRectangle {
            center,
            width,
            height,
            corner_radius: corner_radius.unwrap_or(0.1 * width.min(height)),
            rotation,
        }
    }

    /// Polar clover `r(t) = r₀(1 + amplitude·cos(lobes·t))`, expanded
    /// exactly into Fourier coefficients of `x` and `y`.
    pub fn clover(center: C64, r0: f64, amplitude: f64, lobes: usize, rotation: f64) -> Self {
        let kmax = lobes + 1;
        let mut x = vec![(0.0, 0.0); kmax];
        let mut y = vec![(0.0, 0.0); kmax];
        // r0 (cos t, sin t)
        x[0].0 += r0;
        y[0].1 += r0;
        let h = 0.5 * r0 * amplitude;
        // h (cos((L+1)t) + cos((L-1)t)), h (sin((L+1)t) - sin((L-1)t))
        x[lobes].0 += h;
        y[lobes].1 += h;
        if lobes >= 2 {
            x[lobes - 2].0 += h;
            y[lobes - 2].1 -= h;
        } else if lobes == 1 {
            // cos(0 t) = 1 shifts the centre
            let c = center + C64::from_polar(h, rotation);
            return Curve::TrigPolynomial { center: c, x, y }.rotated_coeffs(rotation);
        }
        Curve::TrigPolynomial { center, x, y }.rotated_coeffs(rotation)
    }

    fn rotated_coeffs(self, rotation: f64) -> Self {
        match self {
            Curve::TrigPolynomial { center, x, y } if rotation != 0.0 => {
                let (s, c) = rotation.sin_cos();
                let rx = x
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| (c * a.0 - s * b.0, c * a.1 - s * b.1))
                    .collect();
                let ry = x
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| (s * a.0 + c * b.0, s * a.1 + c * b.1))
                    .collect();
                Curve::TrigPolynomial {
                    center,
                    x: rx,
                    y: ry,
                }
            }
            other => other,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Curve::Circle { .. } => "circle",
            Curve::Ellipse { .. } => "ellipse",
            Curve::RoundedRectangle { .. } => "rounded_rectangle",
            Curve::TrigPolynomial { .. } => "trig_polynomial",
            Curve::LaurentMap(_) => "laurent_map",
        }
    }

    /// Position and first two parameter derivatives at `t`.
    pub fn derivatives(&self, t: f64) -> [C64; 3] {
        match self {
            Curve::Circle { center, radius } => {
                let e = C64::from_polar(*radius, t);
                [center + e, C64::i() * e, -e]
            }
            Curve::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let rot = C64::from_polar(1.0, *rotation);
                let (s, c) = t.sin_cos();
                [
                    center + rot * C64::new(a * c, b * s),
                    rot * C64::new(-a * s, b * c),
                    rot * C64::new(-a * c, -b * s),
                ]
            }
            Curve::RoundedRectangle {
                center,
                width,
                height,
                corner_radius,
                rotation,
            } => {
                let [x, dx, ddx] = rounded_rectangle_local(*width, *height, *corner_radius, t);
                let rot = C64::from_polar(1.0, *rotation);
                [center + rot * x, rot * dx, rot * ddx]
            }
            Curve::TrigPolynomial { center, x, y } => {
                let mut p = *center;
                let mut d = C64::new(0.0, 0.0);
                let mut dd = C64::new(0.0, 0.0);
                for (j, (cx, cy)) in x.iter().zip(y).enumerate() {
                    let k = (j + 1) as f64;
                    let (s, c) = (k * t).sin_cos();
                    p += C64::new(cx.0 * c + cx.1 * s, cy.0 * c + cy.1 * s);
                    d += C64::new(-cx.0 * s + cx.1 * c, -cy.0 * s + cy.1 * c) * k;
                    dd += C64::new(cx.0 * c + cx.1 * s, cy.0 * c + cy.1 * s) * (-k * k);
                }
                [p, d, dd]
            }
            Curve::LaurentMap(map) => map.derivatives(t),
        }
    }

    pub fn point(&self, t: f64) -> C64 {
        self.derivatives(t)[0]
    }

    /// Signed curvature, positive on convex counter-clockwise arcs.
    pub fn curvature(&self, t: f64) -> f64 {
        let [_, d, dd] = self.derivatives(t);
        (d.conj() * dd).im / d.norm().powi(3)
    }

    /// Image under `z ↦ scale·z + shift`.
    pub fn transformed(&self, map: &Rescale) -> Curve {
        let s = map.scale;
        let z = |c: &C64| map.apply(*c);
        match self {
            Curve::Circle { center, radius } => Curve::Circle {
                center: z(center),
                radius: s * radius,
            },
            Curve::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => Curve::Ellipse {
                center: z(center),
                semi_axes: (s * a, s * b),
                rotation: *rotation,
            },
            Curve::RoundedRectangle {
                center,
                width,
                height,
                corner_radius,
                rotation,
            } => Curve::RoundedRectangle {
                center: z(center),
                width: s * width,
                height: s * height,
                corner_radius: s * corner_radius,
                rotation: *rotation,
            },
            Curve::TrigPolynomial { center, x, y } => Curve::TrigPolynomial {
                center: z(center),
                x: x.iter().map(|c| (s * c.0, s * c.1)).collect(),
                y: y.iter().map(|c| (s * c.0, s * c.1)).collect(),
            },
            Curve::LaurentMap(m) => Curve::LaurentMap(LaurentMap {
                a1: s * m.a1,
                a0: z(&m.a0),
                negative: m.negative.iter().map(|a| a * s).collect(),
            }),
        }
    }

    /// The exterior conformal map of this curve, when it is known in closed form.
    pub fn laurent_map(&self) -> Option<LaurentMap> {
        match self {
            Curve::Circle { center, radius } => Some(LaurentMap::disk(*center, *radius)),
            Curve::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => Some(LaurentMap::ellipse(*center, *a, *b, *rotation)),
            Curve::LaurentMap(m) => Some(m.clone()),
            _ => None,
        }
    }

    /// Closed polyline with `n` vertices at `t = 2πi/n`.
    pub fn polyline(&self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|i| self.point(TAU * i as f64 / n as f64))
            .collect()
    }

    /// Checks parameters, regularity, orientation and simplicity.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCurveParameters(msg));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match self {
            Curve::Circle { center, radius } => {
                if !positive(*radius) || !center.is_finite() {
                    return bad(format!("circle radius must be positive, got {radius}"));
                }
            }
            Curve::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                if !positive(*a) || !positive(*b) || !center.is_finite() || !rotation.is_finite() {
                    return bad(format!(
                        "ellipse semi-axes must be positive, got ({a}, {b})"
                    ));
                }
            }
            Curve::RoundedRectangle {
                center,
                width,
                height,
                corner_radius,
                rotation,
            } => {
                if !positive(*width) || !positive(*height) || !positive(*corner_radius) {
                    return bad("rounded rectangle sizes must be positive".into());
                }
                if 2.0 * corner_radius > width.min(*height) * (1.0 + 1e-12) {
                    return bad(format!(
                        "corner radius {corner_radius} exceeds half the shorter side"
                    ));
                }
                if !center.is_finite() || !rotation.is_finite() {
                    return bad("rounded rectangle placement must be finite".into());
                }
            }
            Curve::TrigPolynomial { center, x, y } => {
                if x.len() != y.len() || x.is_empty() {
                    return bad("trig polynomial needs matching, non-empty x/y coefficients".into());
                }
                let finite = x
                    .iter()
                    .chain(y)
                    .all(|c| c.0.is_finite() && c.1.is_finite());
                if !finite || !center.is_finite() {
                    return bad("trig polynomial coefficients must be finite".into());
                }
            }
            Curve::LaurentMap(m) => {
                LaurentMap::new(m.a1, m.a0, m.negative.clone())?;
            }
        }

        let n = VALIDATION_SAMPLES;
        let scale = self
            .polyline(n)
            .iter()
            .map(|p| p.norm())
            .fold(0.0, f64::max);
        for i in 0..n {
            let d = self.derivatives(TAU * i as f64 / n as f64)[1];
            if !(d.norm() > 1e-12 * scale.max(1e-300)) {
                return bad(format!("{} has a vanishing tangent", self.kind()));
            }
        }
        let poly = self.polyline(n);
        if signed_area(&poly) <= 0.0 {
            if matches!(self, Curve::LaurentMap(_)) {
                return Err(Error::SelfIntersectingMap);
            }
            return bad(format!("{} is not counter-clockwise", self.kind()));
        }
        if polyline_self_intersects(&poly) {
            if matches!(self, Curve::LaurentMap(_)) {
                return Err(Error::SelfIntersectingMap);
            }
            return bad(format!("{} is not simple", self.kind()));
        }
        Ok(())
    }
}

/// Local (unrotated, centred) rounded-rectangle geometry at parameter `t`.
fn rounded_rectangle_local(width: f64, height: f64, r: f64, t: f64) -> [C64; 3] {
    let hw = 0.5 * width - r;
    let hh = 0.5 * height - r;
    let arc = 0.5 * PI * r;
    let total = 4.0 * hw + 4.0 * hh + 4.0 * arc;
    let speed = total / TAU;
    let mut s = (t.rem_euclid(TAU) / TAU) * total;

    // (kind, length, anchor, heading/start angle); lines carry a unit direction,
    // arcs a centre and start angle.
    enum Piece {
        Line(C64, C64),
        Arc(C64, f64),
    }
    let pieces = [
        (hh, Piece::Line(C64::new(0.5 * width, 0.0), C64::i())),
        (arc, Piece::Arc(C64::new(hw, hh), 0.0)),
        (
            2.0 * hw,
            Piece::Line(C64::new(hw, 0.5 * height), C64::new(-1.0, 0.0)),
        ),
        (arc, Piece::Arc(C64::new(-hw, hh), 0.5 * PI)),
        (2.0 * hh, Piece::Line(C64::new(-0.5 * width, hh), -C64::i())),
        (arc, Piece::Arc(C64::new(-hw, -hh), PI)),
        (
            2.0 * hw,
            Piece::Line(C64::new(-hw, -0.5 * height), C64::new(1.0, 0.0)),
        ),
        (arc, Piece::Arc(C64::new(hw, -hh), 1.5 * PI)),
        (hh, Piece::Line(C64::new(0.5 * width, -hh), C64::i())),
    ];
    let last = pieces.len() - 1;
    for (k, (len, piece)) in pieces.iter().enumerate() {
        if s <= *len || k == last {
            return match piece {
                Piece::Line(start, dir) => [start + dir * s, dir * speed, C64::new(0.0, 0.0)],
                Piece::Arc(c, a0) => {
                    let e = C64::from_polar(1.0, a0 + s / r);
                    [c + e * r, C64::i() * e * speed, -e * (speed * speed / r)]
                }
            };
        }
        s -= len;
    }
    unreachable!()
}

/// Shoelace area of a closed polyline (positive when counter-clockwise).
pub fn signed_area(poly: &[C64]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a.re * b.im - a.im * b.re
        })
        .sum::<f64>()
        * 0.5
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d3 != 0.0
}

fn polyline_self_intersects(poly: &[C64]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a1, a2) = (poly[i], poly[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(a1, a2, poly[j], poly[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

fn polylines_cross(a: &[C64], b: &[C64]) -> bool {
    let (na, nb) = (a.len(), b.len());
    (0..na).any(|i| (0..nb).any(|j| segments_cross(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])))
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: C64, poly: &[C64]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn min_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .flat_map(|p| b.iter().map(move |q| (p - q).norm()))
        .fold(f64::INFINITY, f64::min)
}

fn diameter(poly: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in poly.iter().enumerate() {
        for q in &poly[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Affine map `z ↦ scale·z + shift` with `scale > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rescale {
    pub scale: f64,
    pub shift: C64,
}

impl Default for Rescale {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rescale {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            shift: C64::new(0.0, 0.0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.shift == C64::new(0.0, 0.0)
    }

    pub fn apply(&self, z: C64) -> C64 {
        z * self.scale + self.shift
    }

    pub fn invert(&self, z: C64) -> C64 {
        (z - self.shift) / self.scale
    }

    pub fn inverse(&self) -> Rescale {
        Rescale {
            scale: 1.0 / self.scale,
            shift: -self.shift / self.scale,
        }
    }
}

/// Outer boundary plus cavities, in the working (possibly rescaled) frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub outer: Curve,
    pub cavities: Vec<Curve>,
    /// Map from the user frame to the working frame.
    pub rescale: Rescale,
}

impl Scene {
    /// Validates the configuration and shrinks it when the outer diameter is ≥ 1.
    pub fn build(outer: Curve, cavities: Vec<Curve>) -> Result<Scene> {
        outer.validate()?;
        for c in &cavities {
            c.validate()?;
        }
        let n = VALIDATION_SAMPLES;
        let outer_poly = outer.polyline(n);
        let polys: Vec<Vec<C64>> = cavities.iter().map(|c| c.polyline(n)).collect();
        let scale = diameter(&outer_poly);
        let gap_tol = 1e-9 * scale;

        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                let (a, b) = (&polys[i], &polys[j]);
                if point_in_polygon(a[0], b)
                    || point_in_polygon(b[0], a)
                    || polylines_cross(a, b)
                    || min_distance(a, b) <= gap_tol
                {
                    return Err(Error::OverlappingCavities(i, j));
                }
            }
        }
        for (i, p) in polys.iter().enumerate() {
            if !p.iter().all(|z| point_in_polygon(*z, &outer_poly))
                || polylines_cross(p, &outer_poly)
                || min_distance(p, &outer_poly) <= gap_tol
            {
                return Err(Error::CavityTouchesOuter(i));
            }
        }

        let rescale = if scale >= 1.0 {
            let (lo_re, hi_re, lo_im, hi_im) = outer_poly.iter().fold(
                (
                    f64::INFINITY,
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    f64::NEG_INFINITY,
                ),
                |(a, b, c, d), z| (a.min(z.re), b.max(z.re), c.min(z.im), d.max(z.im)),
            );
            let mid = C64::new(0.5 * (lo_re + hi_re), 0.5 * (lo_im + hi_im));
            let s = RESCALE_TARGET_DIAMETER / scale;
            Rescale {
                scale: s,
                shift: -mid * s,
            }
        } else {
            Rescale::identity()
        };
        if rescale.is_identity() {
            Ok(Scene {
                outer,
                cavities,
                rescale,
            })
        } else {
            log::info!(
                "outer diameter {scale:.4} >= 1: rescaling by {:.6}",
                rescale.scale
            );
            Ok(Scene {
                outer: outer.transformed(&rescale),
                cavities: cavities.iter().map(|c| c.transformed(&rescale)).collect(),
                rescale,
            })
        }
    }

    /// Sampled diameter of the outer boundary in the working frame.
    pub fn outer_diameter(&self) -> f64 {
        diameter(&self.outer.polyline(VALIDATION_SAMPLES))
    }

    /// All curves, outer boundary first.
    pub fn curves(&self) -> Vec<Curve> {
        std::iter::once(self.outer.clone())
            .chain(self.cavities.iter().cloned())
            .collect()
    }
}

/// Per-curve bookkeeping inside a [`BoundaryGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct CurveBlock {
    pub nodes: usize,
    pub offset: usize,
}

impl CurveBlock {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.nodes
    }
}

/// Trapezoidal discretization of a stack of closed curves.
///
/// Node `i` of curve `k` sits at `t_i = 2πi/M`; its weight is `2π|x'(t_i)|/M`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryGrid {
    pub blocks: Vec<CurveBlock>,
    pub params: Vec<f64>,
    pub points: Vec<C64>,
    /// Parameter derivative `x'(t)`.
    pub tangents: Vec<C64>,
    pub speeds: Vec<f64>,
    /// Unit normals pointing out of the region each curve encloses.
    pub normals: Vec<C64>,
    pub curvature: Vec<f64>,
    pub weights: Vec<f64>,
    pub curve_of: Vec<usize>,
}

impl BoundaryGrid {
    pub fn new(curves: &[Curve], nodes_per_curve: usize) -> Result<BoundaryGrid> {
        let m = nodes_per_curve;
        if !m.is_multiple_of(2) || m < 16 {
            return Err(Error::OddNodeCount(m));
        }
        let total = m * curves.len();
        let mut g = BoundaryGrid {
            blocks: Vec::with_capacity(curves.len()),
            params: Vec::with_capacity(total),
            points: Vec::with_capacity(total),
            tangents: Vec::with_capacity(total),
            speeds: Vec::with_capacity(total),
            normals: Vec::with_capacity(total),
            curvature: Vec::with_capacity(total),
            weights: Vec::with_capacity(total),
            curve_of: Vec::with_capacity(total),
        };
        for (k, curve) in curves.iter().enumerate() {
            g.blocks.push(CurveBlock {
                nodes: m,
                offset: k * m,
            });
            for i in 0..m {
                let t = TAU * i as f64 / m as f64;
                let [x, dx, ddx] = curve.derivatives(t);
                let speed = dx.norm();
                g.params.push(t);
                g.points.push(x);
                g.tangents.push(dx);
                g.speeds.push(speed);
                g.normals.push(-C64::i() * dx / speed);
                g.curvature.push((dx.conj() * ddx).im / speed.powi(3));
                g.weights.push(TAU * speed / m as f64);
                g.curve_of.push(k);
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn curve_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn curve_range(&self, k: usize) -> Range<usize> {
        self.blocks[k].range()
    }

    /// Flat index → (curve, node).
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let k = self.curve_of[flat];
        (k, flat - self.blocks[k].offset)
    }

    /// (curve, node) → flat index.
    pub fn flat(&self, curve: usize, node: usize) -> usize {
        self.blocks[curve].offset + node
    }

    pub fn perimeter(&self, k: usize) -> f64 {
        self.weights[self.curve_range(k)].iter().sum()
    }

    /// Largest node spacing on curve `k`.
    pub fn max_spacing(&self, k: usize) -> f64 {
        self.weights[self.curve_range(k)]
            .iter()
            .fold(0.0, |a: f64, &b| a.max(b))
    }

    /// Area enclosed by curve `k` by the trapezoidal rule for `½∮ x dy − y dx`.
    pub fn enclosed_area(&self, k: usize) -> f64 {
        let m = self.blocks[k].nodes as f64;
        self.curve_range(k)
            .map(|i| cross(self.points[i], self.tangents[i]))
            .sum::<f64>()
            * 0.5
            * TAU
            / m
    }

    /// The grid restricted to a contiguous range of curves.
    pub fn subgrid(&self, curves: Range<usize>) -> BoundaryGrid {
        let start = self.blocks[curves.start].offset;
        let end = self.blocks[curves.end - 1].range().end;
        let blocks = self.blocks[curves.clone()]
            .iter()
            .map(|b| CurveBlock {
                nodes: b.nodes,
                offset: b.offset - start,
            })
            .collect();
        BoundaryGrid {
            blocks,
            params: self.params[start..end].to_vec(),
            points: self.points[start..end].to_vec(),
            tangents: self.tangents[start..end].to_vec(),
            speeds: self.speeds[start..end].to_vec(),
            normals: self.normals[start..end].to_vec(),
            curvature: self.curvature[start..end].to_vec(),
            weights: self.weights[start..end].to_vec(),
            curve_of: self.curve_of[start..end]
                .iter()
                .map(|k| k - curves.start)
                .collect(),
        }
    }

    /// True when curve `k` of `self` and curve `l` of `other` carry the same nodes.
    pub fn same_curve(&self, k: usize, other: &BoundaryGrid, l: usize) -> bool {
        let (a, b) = (self.curve_range(k), other.curve_range(l));
        a.len() == b.len() && self.points[a] == other.points[b]
    }
}

/// Samples every curve of the scene, outer boundary first.
pub fn sample_grid(scene: &Scene, nodes_per_curve: usize) -> Result<BoundaryGrid> {
    BoundaryGrid::new(&scene.curves(), nodes_per_curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn small_scene_is_not_rescaled() {
        let s = Scene::build(
            Curve::circle(c(0.0, 0.0), 0.45),
            vec![Curve::circle(c(0.1, 0.0), 0.05)],
        )
        .unwrap();
        assert!(s.rescale.is_identity());
    }

    #[test]
    fn large_scene_is_rescaled_below_unit_diameter() {
        let s = Scene::build(
            Curve::circle(c(0.0, 0.0), 2.0),
            vec![Curve::circle(c(0.5, 0.0), 0.3)],
        )
        .unwrap();
        let k = s.rescale.scale;
        assert!((k - 0.9 / 4.0).abs() < 1e-9, "scale {k}");
        assert!(s.outer_diameter() < 1.0);
        match &s.cavities[0] {
            Curve::Circle { radius, center } => {
                assert!((radius - 0.3 * k).abs() < 1e-14);
                assert!((s.rescale.invert(*center) - c(0.5, 0.0)).norm() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overlapping_cavities_rejected() {
        let err = Scene::build(
            Curve::circle(c(0.0, 0.0), 0.45),
            vec![
                Curve::circle(c(0.1, 0.0), 0.2),
                Curve::circle(c(0.25, 0.0), 0.2),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingCavities(0, 1)), "{err}");
    }

    #[test]
    fn cavity_crossing_outer_rejected() {
        let err = Scene::build(
            Curve::circle(c(0.0, 0.0), 0.45),
            vec![Curve::circle(c(0.4, 0.0), 0.1)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::CavityTouchesOuter(0)));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            Curve::circle(c(0.0, 0.0), -1.0).validate(),
            Err(Error::InvalidCurveParameters(_))
        ));
        assert!(matches!(
            Curve::rounded_rectangle(c(0.0, 0.0), 0.4, 0.2, Some(0.2), 0.0).validate(),
            Err(Error::InvalidCurveParameters(_))
        ));
        // clockwise ellipse via negative semi-axis is rejected
        assert!(Curve::ellipse(c(0.0, 0.0), 0.3, -0.1, 0.0)
            .validate()
            .is_err());
    }

    #[test]
    fn self_intersecting_laurent_map_detected() {
        // a strong a_{-2} term makes the image of the circle loop
        let m = LaurentMap::new(0.1, c(0.0, 0.0), vec![c(0.0, 0.0), c(0.06, 0.0)]).unwrap();
        assert!(matches!(
            Curve::LaurentMap(m).validate(),
            Err(Error::SelfIntersectingMap)
        ));
    }

    #[test]
    fn odd_node_count_rejected() {
        let curves = [Curve::circle(c(0.0, 0.0), 0.3)];
        assert!(matches!(
            BoundaryGrid::new(&curves, 63),
            Err(Error::OddNodeCount(63))
        ));
        assert!(matches!(
            BoundaryGrid::new(&curves, 8),
            Err(Error::OddNodeCount(8))
        ));
    }

    #[test]
    fn circle_grid_is_equispaced() {
        let r = 0.3;
        let g = BoundaryGrid::new(&[Curve::circle(c(0.0, 0.0), r)], 64).unwrap();
        for i in 0..64 {
            assert!((g.points[i].norm() - r).abs() < 1e-15);
            assert!((g.weights[i] - TAU * r / 64.0).abs() < 1e-16);
            assert!((g.normals[i] - g.points[i] / r).norm() < 1e-14);
            assert!((g.curvature[i] - 1.0 / r).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_perimeter_matches_adaptive_quadrature() {
        let (a, b) = (0.3, 0.1);
        let g = BoundaryGrid::new(&[Curve::ellipse(c(0.0, 0.0), a, b, 0.4)], 128).unwrap();
        // oracle: composite Simpson on a quarter arc with very fine panels
        let f = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
        let n = 200_000;
        let h = 0.5 * PI / n as f64;
        let mut s = f(0.0) + f(0.5 * PI);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = 4.0 * s * h / 3.0;
        assert!((g.perimeter(0) - oracle).abs() / oracle < 1e-10);
    }

    #[test]
    fn rounded_rectangle_curvature_bounded() {
        let rr = Curve::rounded_rectangle(c(0.02, -0.01), 0.4, 0.2, Some(0.05), 0.3);
        rr.validate().unwrap();
        let g = BoundaryGrid::new(&[rr], 256).unwrap();
        let kmax = g.curvature.iter().cloned().fold(f64::MIN, f64::max);
        let kmin = g.curvature.iter().cloned().fold(f64::MAX, f64::min);
        assert!(kmax <= 1.0 / 0.05 + 1e-9, "{kmax}");
        assert!(kmin >= -1e-9);
        // constant speed: perimeter equals the analytic arc-line length
        let exact = 2.0 * (0.4 - 0.1) + 2.0 * (0.2 - 0.1) + TAU * 0.05;
        assert!((g.perimeter(0) - exact).abs() < 1e-12);
        // area: rectangle minus the four corner defects
        let area = 0.4 * 0.2 - (4.0 - PI) * 0.05 * 0.05;
        assert!((g.enclosed_area(0) - area).abs() / area < 1e-4);
    }

    #[test]
    fn shoelace_area_matches_analytic() {
        let g = BoundaryGrid::new(
            &[
                Curve::circle(c(0.1, 0.0), 0.2),
                Curve::ellipse(c(-0.1, 0.2), 0.15, 0.05, 1.0),
            ],
            256,
        )
        .unwrap();
        let ac = PI * 0.04;
        let ae = PI * 0.15 * 0.05;
        assert!((g.enclosed_area(0) - ac).abs() / ac < 1e-8);
        assert!((g.enclosed_area(1) - ae).abs() / ae < 1e-8);
    }

    #[test]
    fn every_kind_is_counter_clockwise() {
        let curves = [
            Curve::circle(c(0.0, 0.0), 0.2),
            Curve::ellipse(c(0.0, 0.0), 0.2, 0.1, 2.0),
            Curve::rounded_rectangle(c(0.0, 0.0), 0.3, 0.2, None, 0.0),
            Curve::clover(c(0.0, 0.0), 0.2, 0.3, 4, 0.2),
            Curve::LaurentMap(LaurentMap::ellipse(c(0.1, 0.1), 0.2, 0.1, 0.3)),
        ];
        for curve in &curves {
            curve.validate().unwrap();
            let g = BoundaryGrid::new(std::slice::from_ref(curve), 256).unwrap();
            assert!(g.enclosed_area(0) > 0.0, "{}", curve.kind());
        }
    }

    #[test]
    fn clover_matches_polar_form() {
        let (r0, a) = (0.2, 0.3);
        let curve = Curve::clover(c(0.05, 0.0), r0, a, 4, 0.0);
        for i in 0..50 {
            let t = 0.13 * i as f64;
            let expect = c(0.05, 0.0) + C64::from_polar(r0 * (1.0 + a * (4.0 * t).cos()), t);
            assert!((curve.point(t) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn laurent_ellipse_traces_the_ellipse() {
        let m = LaurentMap::ellipse(c(0.1, -0.05), 0.2, 0.08, 0.7);
        let e = Curve::ellipse(c(0.1, -0.05), 0.2, 0.08, 0.7);
        // same point set: each Laurent point lies on the implicit ellipse
        let rot = C64::from_polar(1.0, -0.7);
        for i in 0..40 {
            let p = (m.eval(C64::from_polar(1.0, 0.157 * i as f64)) - c(0.1, -0.05)) * rot;
            let v = (p.re / 0.2).powi(2) + (p.im / 0.08).powi(2);
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(e.laurent_map().unwrap(), m);
    }

    #[test]
    fn nested_grids_share_nodes_bitwise() {
        let curves = [
            Curve::ellipse(c(0.0, 0.1), 0.2, 0.1, 0.3),
            Curve::clover(c(0.0, 0.0), 0.1, 0.2, 4, 0.0),
        ];
        let g1 = BoundaryGrid::new(&curves, 64).unwrap();
        let g2 = BoundaryGrid::new(&curves, 128).unwrap();
        for k in 0..2 {
            for i in 0..64 {
                assert_eq!(g1.points[g1.flat(k, i)], g2.points[g2.flat(k, 2 * i)]);
            }
        }
    }

    #[test]
    fn rescale_round_trip() {
        let map = Rescale {
            scale: 0.37,
            shift: c(0.1, -0.3),
        };
        let g = BoundaryGrid::new(&[Curve::clover(c(0.3, 1.0), 0.7, 0.2, 4, 0.0)], 64).unwrap();
        for p in &g.points {
            assert!((map.invert(map.apply(*p)) - p).norm() < 1e-14);
            assert!((map.inverse().apply(map.apply(*p)) - p).norm() < 1e-14);
        }
    }

    #[test]
    fn subgrid_and_index_maps() {
        let curves = [
            Curve::circle(c(0.0, 0.0), 0.45),
            Curve::circle(c(0.1, 0.0), 0.05),
            Curve::circle(c(-0.2, 0.0), 0.05),
        ];
        let g = BoundaryGrid::new(&curves, 32).unwrap();
        assert_eq!(g.locate(70), (2, 6));
        assert_eq!(g.flat(2, 6), 70);
        let sub = g.subgrid(1..3);
        assert_eq!(sub.len(), 64);
        assert_eq!(sub.curve_of[40], 1);
        assert!(sub.same_curve(0, &g, 1));
        assert!(!sub.same_curve(0, &g, 2));
        for w in &g.normals {
            assert!((w.norm() - 1.0).abs() < 1e-12);
        }
    }
}
