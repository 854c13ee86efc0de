//! Nyström discretizations of the logarithmic layer potentials.
//!
//! `G(x) = −(1/2π) log|x|`. Normal derivatives use the unit normal pointing
//! *into* the region each curve encloses, so that for a single curve
//!
//! * `Tr_±(𝒟q) = (∓½ + 𝖫)q` (`+` is the unbounded side),
//! * `∂ₙ𝒮q̂|_± = (±½ + 𝖫*)q̂`, hence `∂ₙ𝒮q̂|₋ − ∂ₙ𝒮q̂|₊ = −q̂`,
//! * `𝒟1 = 1` inside and `0` outside.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{BoundaryField, BoundaryOperator};
use crate::geometry::BoundaryGrid;

/// Off-curve evaluation points must be at least this many local node
/// spacings away from every source node.
pub const NEAR_FIELD_SPACINGS: f64 = 3.0;

/// `G(x) = −(1/2π) log|x|`.
pub fn green(x: C64) -> f64 {
    -x.norm().ln() / TAU
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kernel {
    Single,
    Double,
    Adjoint,
}

/// Weights `R_j` of the periodic log quadrature
/// `∫₀^{2π} log(4 sin²((t_i−τ)/2)) f(τ) dτ ≈ Σ_j R_{|i−j|} f(t_j)`.
fn log_weights(m: usize) -> Vec<f64> {
    let n = m / 2;
    let mf = m as f64;
    (0..m)
        .map(|j| {
            let d = TAU * j as f64 / mf;
            let s: f64 = (1..n).map(|k| (k as f64 * d).cos() / k as f64).sum();
            -4.0 * PI / mf * s - 4.0 * PI / (mf * mf) * (n as f64 * d).cos()
        })
        .collect()
}

fn assemble(src: &Arc<BoundaryGrid>, tgt: &Arc<BoundaryGrid>, kernel: Kernel) -> BoundaryOperator {
    let (nt, ns) = (tgt.len(), src.len());
    let same: Vec<Vec<bool>> = (0..tgt.curve_count())
        .map(|k| {
            (0..src.curve_count())
                .map(|l| tgt.same_curve(k, src, l))
                .collect()
        })
        .collect();
    let rweights: Vec<Vec<f64>> = src.blocks.iter().map(|b| log_weights(b.nodes)).collect();
    let mut matrix = DMatrix::<f64>::zeros(nt, ns);
    matrix
        .as_mut_slice()
        .par_chunks_mut(nt)
        .enumerate()
        .for_each(|(j, col)| {
            let l = src.curve_of[j];
            let jl = j - src.blocks[l].offset;
            let m = src.blocks[l].nodes;
            let y = src.points[j];
            let w = src.weights[j];
            for (i, entry) in col.iter_mut().enumerate() {
                let k = tgt.curve_of[i];
                let x = tgt.points[i];
                let self_block = same[k][l];
                let il = i - tgt.blocks[k].offset;
                *entry = match kernel {
                    Kernel::Single if self_block => {
                        let r = rweights[l][il.abs_diff(jl)];
                        let k2 = if il == jl {
                            -src.speeds[j].ln() / TAU
                        } else {
                            let half = 0.5 * (tgt.params[i] - src.params[j]);
                            let s2 = 4.0 * half.sin().powi(2);
                            -((x - y).norm_sqr() / s2).ln() / (4.0 * PI)
                        };
                        (-r / (4.0 * PI) + TAU / m as f64 * k2) * src.speeds[j]
                    }
                    Kernel::Single => green(x - y) * w,
                    Kernel::Double | Kernel::Adjoint if self_block && il == jl => {
                        src.curvature[j] / (4.0 * PI) * w
                    }
                    Kernel::Double => {
                        let d = y - x;
                        (d * src.normals[j].conj()).re / d.norm_sqr() / TAU * w
                    }
                    Kernel::Adjoint => {
                        let d = x - y;
                        (d * tgt.normals[i].conj()).re / d.norm_sqr() / TAU * w
                    }
                };
            }
        });
    BoundaryOperator::new(src.clone(), tgt.clone(), matrix)
}

/// Single layer `𝖲`; same-curve blocks use the log-splitting quadrature.
pub fn assemble_single_layer(src: &Arc<BoundaryGrid>, tgt: &Arc<BoundaryGrid>) -> BoundaryOperator {
    assemble(src, tgt, Kernel::Single)
}

/// Double layer `𝖫`, kernel `∂_{n_y} G(x − y)`.
pub fn assemble_double_layer(src: &Arc<BoundaryGrid>, tgt: &Arc<BoundaryGrid>) -> BoundaryOperator {
    assemble(src, tgt, Kernel::Double)
}

/// Adjoint double layer `𝖫*`, kernel `∂_{n_x} G(x − y)`.
pub fn assemble_adjoint_double_layer(
    src: &Arc<BoundaryGrid>,
    tgt: &Arc<BoundaryGrid>,
) -> BoundaryOperator {
    assemble(src, tgt, Kernel::Adjoint)
}

fn check_far(grid: &BoundaryGrid, points: &[C64]) -> Result<()> {
    for (index, z) in points.iter().enumerate() {
        for j in 0..grid.len() {
            let distance = (z - grid.points[j]).norm();
            let limit = NEAR_FIELD_SPACINGS * grid.weights[j];
            if distance < limit {
                return Err(Error::PointTooCloseToBoundary {
                    index,
                    distance,
                    limit,
                });
            }
        }
    }
    Ok(())
}

fn evaluate(
    density: &BoundaryField,
    points: &[C64],
    f: impl Fn(usize, C64) -> C64 + Sync,
) -> Result<Vec<C64>> {
    let g = &density.grid;
    check_far(g, points)?;
    Ok(points
        .par_iter()
        .map(|&z| {
            (0..g.len())
                .map(|j| f(j, z) * density.values[j])
                .sum::<C64>()
        })
        .collect())
}

/// `𝒮q̂(z)` by the plain trapezoid rule.
pub fn evaluate_single_layer(density: &BoundaryField, points: &[C64]) -> Result<Vec<C64>> {
    let g = density.grid.clone();
    evaluate(density, points, |j, z| {
        C64::from(green(z - g.points[j]) * g.weights[j])
    })
}

/// `∇𝒮q̂(z)` as the pair `(∂ₓ, ∂ᵧ)`.
pub fn evaluate_single_layer_gradient(
    density: &BoundaryField,
    points: &[C64],
) -> Result<Vec<(C64, C64)>> {
    let g = &density.grid;
    check_far(g, points)?;
    Ok(points
        .par_iter()
        .map(|&z| {
            let mut gx = C64::new(0.0, 0.0);
            let mut gy = C64::new(0.0, 0.0);
            for j in 0..g.len() {
                let d = z - g.points[j];
                let c = -g.weights[j] / (TAU * d.norm_sqr());
                gx += density.values[j] * (c * d.re);
                gy += density.values[j] * (c * d.im);
            }
            (gx, gy)
        })
        .collect())
}

/// `𝒟q(z)` by the plain trapezoid rule.
pub fn evaluate_double_layer(density: &BoundaryField, points: &[C64]) -> Result<Vec<C64>> {
    let g = density.grid.clone();
    evaluate(density, points, |j, z| {
        let d = g.points[j] - z;
        C64::from((d * g.normals[j].conj()).re / d.norm_sqr() / TAU * g.weights[j])
    })
}

/// `𝒞q(z) = (1/2πi) ∮ q(ζ)/(ζ − z) dζ` over every curve of the grid.
pub fn cauchy_transform(density: &BoundaryField, points: &[C64]) -> Result<Vec<C64>> {
    let g = density.grid.clone();
    let i2pi = C64::new(0.0, TAU);
    evaluate(density, points, |j, z| {
        let m = g.blocks[g.curve_of[j]].nodes as f64;
        g.tangents[j] * (TAU / m) / ((g.points[j] - z) * i2pi)
    })
}
