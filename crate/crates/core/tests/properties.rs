use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use cavity_moments::dtn::{assemble_dtn, DtnOptions, Noise};
use cavity_moments::field::BoundaryField;
use cavity_moments::geometry::{BoundaryGrid, Curve, Scene};
use cavity_moments::kernels::{
    assemble_single_layer, evaluate_single_layer_gradient, NEAR_FIELD_SPACINGS,
};
use cavity_moments::moments::{extract_moments, MomentExtractor};
use cavity_moments::prony::{solve_prony, PronyOptions};
use cavity_moments::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            (0.5 * (x + 1.0), 0.5 * w)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Lagrange interpolation through `(xs, ys)` evaluated at `x`.
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if i != j {
                l *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        sum += l * ys[i];
    }
    sum
}

fn upsample(values: &[C64], factor: usize) -> Vec<C64> {
    let m = values.len();
    let half = m as i64 / 2;
    let coeffs: Vec<(i64, C64)> = (-half + 1..half)
        .map(|k| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -TAU * (k * j as i64) as f64 / m as f64))
                .sum();
            (k, s / m as f64)
        })
        .collect();
    (0..m * factor)
        .map(|j| {
            let t = TAU * j as f64 / (m * factor) as f64;
            coeffs
                .iter()
                .map(|(k, a)| a * C64::from_polar(1.0, *k as f64 * t))
                .sum()
        })
        .collect()
}

#[test]
fn single_layer_energy_matches_field_energy() {
    let (m, factor) = (256, 8);
    let center = c(0.03, -0.02);
    let curve = Curve::ellipse(center, 0.3, 0.2, 0.4);
    let grid = Arc::new(BoundaryGrid::new(std::slice::from_ref(&curve), m).unwrap());
    let raw = BoundaryField::from_params(grid.clone(), |_, t| {
        c((2.0 * t).cos() + 0.4 * t.sin() + 0.3 * (3.0 * t).cos(), 0.0)
    });
    // remove the circulation
    let mean = raw.integral(0) / grid.perimeter(0);
    let q = raw.sub(&BoundaryField::constant(grid.clone(), mean));
    let s = assemble_single_layer(&grid, &grid);
    let sq = s.apply(&q);
    let pairing: f64 = (0..m)
        .map(|j| grid.weights[j] * (q.values[j] * sq.values[j].conj()).re)
        .sum();

    let fine = Arc::new(BoundaryGrid::new(std::slice::from_ref(&curve), m * factor).unwrap());
    let q_fine = BoundaryField::new(fine.clone(), upsample(&q.values, factor));
    let limit = NEAR_FIELD_SPACINGS * fine.weights.iter().cloned().fold(0.0, f64::max) * 1.1;

    let energy_at = |pts: &[C64]| -> Vec<f64> {
        evaluate_single_layer_gradient(&q_fine, pts)
            .unwrap()
            .iter()
            .map(|(gx, gy)| gx.norm_sqr() + gy.norm_sqr())
            .collect()
    };
    let gl = gauss_legendre(48);
    let nt = 512;
    let mut interior = 0.0;
    let mut exterior = 0.0;
    for i in 0..nt {
        let t = TAU * i as f64 / nt as f64;
        let [x, dx, _] = curve.derivatives(t);
        let r = x - center;
        let cross = (r.re * dx.im - r.im * dx.re).abs();
        let nu = c(dx.im, -dx.re) / dx.norm();
        let reach = (r.re * nu.re + r.im * nu.im).abs();
        // radial parameters beyond which the sample is too close to the curve
        let lam_safe = 1.0 - limit / reach;
        let mu_safe = 1.0 / (1.0 + limit / reach);

        let lam_nodes: Vec<f64> = gl.iter().map(|(x, _)| *x).collect();
        let safe_l: Vec<f64> = (0..5)
            .map(|k| lam_safe - k as f64 * (1.0 - lam_safe))
            .collect();
        let pts: Vec<C64> = lam_nodes
            .iter()
            .chain(&safe_l)
            .map(|&l| center + r * l.min(lam_safe))
            .collect();
        let vals = energy_at(&pts);
        let (body, tail) = vals.split_at(gl.len());
        for (k, (l, w)) in gl.iter().enumerate() {
            let f = if *l > lam_safe {
                lagrange(&safe_l, tail, *l)
            } else {
                body[k]
            };
            interior += w * f * l * cross;
        }

        let safe_m: Vec<f64> = (0..5)
            .map(|k| mu_safe - k as f64 * (1.0 - mu_safe))
            .collect();
        let pts: Vec<C64> = gl
            .iter()
            .map(|(x, _)| *x)
            .chain(safe_m.iter().copied())
            .map(|mu| center + r / mu.min(mu_safe))
            .collect();
        let vals = energy_at(&pts);
        let (body, tail) = vals.split_at(gl.len());
        for (k, (mu, w)) in gl.iter().enumerate() {
            let f = if *mu > mu_safe {
                lagrange(&safe_m, tail, *mu)
            } else {
                body[k]
            };
            exterior += w * f * cross / mu.powi(3);
        }
    }
    let dt = TAU / nt as f64;
    let field = (interior + exterior) * dt;
    let rel = (field - pairing).abs() / pairing;
    assert!(pairing > 0.0);
    assert!(
        rel < 1e-2,
        "pairing {pairing:.6e}, field energy {field:.6e}, rel {rel:.2e}"
    );
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

#[test]
fn moments_are_translation_covariant() {
    let outer = Curve::circle(c(0.0, 0.0), 0.45);
    let shift = c(0.07, -0.05);
    let place = |z: C64| {
        let scene = Scene::build(outer.clone(), vec![Curve::ellipse(z, 0.09, 0.05, 0.6)]).unwrap();
        assert!(scene.rescale.is_identity());
        let dtn = assemble_dtn(&scene, 256, DtnOptions::default()).unwrap();
        extract_moments(&dtn, 4, scene.rescale).unwrap().values
    };
    let a = place(c(-0.05, 0.04));
    let b = place(c(-0.05, 0.04) + shift);
    for m in 0..a.len() {
        let predicted: C64 = (0..=m)
            .map(|k| a[k] * shift.powu((m - k) as u32) * binomial(m, k))
            .sum();
        let rel = (b[m] - predicted).norm() / predicted.norm();
        assert!(rel < 1e-4, "m={m}: {} vs {predicted}, rel {rel:.2e}", b[m]);
    }
}

#[test]
fn moment_growth_is_bounded_by_the_hull() {
    let scene = Scene::build(
        Curve::circle(c(0.0, 0.0), 0.45),
        vec![
            Curve::circle(c(0.2, 0.1), 0.05),
            Curve::clover(c(-0.1, -0.15), 0.07, 0.2, 3, 0.0),
        ],
    )
    .unwrap();
    let dtn = assemble_dtn(&scene, 256, DtnOptions::default()).unwrap();
    let tau = extract_moments(&dtn, 5, scene.rescale).unwrap().values;
    let reach = scene
        .cavities
        .iter()
        .flat_map(|cv| cv.polyline(512))
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(tau[0].im.abs() / tau[0].norm() < 1e-6);
    for (m, t) in tau.iter().enumerate() {
        assert!(
            t.norm() <= tau[0].re * reach.powi(m as i32) * (1.0 + 1e-9),
            "m={m}"
        );
    }
}

#[test]
fn refinement_changes_moments_little() {
    let scene = Scene::build(
        Curve::ellipse(c(0.0, 0.0), 0.45, 0.38, 0.2),
        vec![Curve::ellipse(c(0.08, 0.05), 0.1, 0.06, 0.3)],
    )
    .unwrap();
    let tau = |m| {
        let dtn = assemble_dtn(&scene, m, DtnOptions::default()).unwrap();
        extract_moments(&dtn, 3, scene.rescale).unwrap().values
    };
    let coarse = tau(128);
    let finer = tau(256);
    for m in 0..coarse.len() {
        let rel = (coarse[m] - finer[m]).norm() / finer[m].norm();
        assert!(rel < 1e-6, "m={m}: rel {rel:.2e}");
    }
}

#[test]
fn residuals_grow_with_noise() {
    // a single disk is exactly one atom, so the overdetermined fit sees only noise
    let scene = Scene::build(
        Curve::circle(c(0.0, 0.0), 0.45),
        vec![Curve::circle(c(0.15, 0.05), 0.06)],
    )
    .unwrap();
    let median_residual = |level: f64| {
        let mut r: Vec<f64> = (0..5u64)
            .map(|seed| {
                let noise = (level > 0.0).then_some(Noise { level, seed });
                let dtn = assemble_dtn(
                    &scene,
                    128,
                    DtnOptions {
                        with_interaction: false,
                        noise,
                    },
                )
                .unwrap();
                let tau = MomentExtractor::new(&dtn).unwrap().moments(8).unwrap();
                let fit = solve_prony(&tau, 1, PronyOptions::default()).unwrap();
                fit.residuals.iter().cloned().fold(0.0, f64::max)
            })
            .collect();
        r.sort_by(f64::total_cmp);
        r[2]
    };
    let med: Vec<f64> = [0.0, 1e-6, 1e-4]
        .iter()
        .map(|&l| median_residual(l))
        .collect();
    assert!(med[0] <= med[1] && med[1] <= med[2], "{med:?}");
    assert!(med[2] > 10.0 * med[0], "{med:?}");
}
