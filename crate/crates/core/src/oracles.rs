//! Closed-form and series references for the moment measure.
//!
//! * a single cavity with a known exterior conformal map,
//! * two disjoint disks, through an explicit image-charge series,
//! * the small-inclusion asymptotic measure.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::{Curve, LaurentMap};
use crate::prony::{Atom, AtomicMeasure};

/// `τ_m = (2a₁/(m+1)) ∫₀^{2π} e^{−it} φ(e^{it})^{m+1} dt` for `m = 0…m_max`.
pub fn conformal_moments(map: &LaurentMap, m_max: usize) -> Result<Vec<C64>> {
    Curve::LaurentMap(map.clone()).validate()?;
    let k = map.negative.len();
    // the integrand is a trigonometric polynomial of degree (m+1)(k+1)
    let nodes = 2 * ((m_max + 1) * (k + 1) + 2) + 16;
    let samples: Vec<(C64, C64)> = (0..nodes)
        .map(|j| {
            let t = TAU * j as f64 / nodes as f64;
            let e = C64::from_polar(1.0, t);
            (e.conj(), map.eval(e))
        })
        .collect();
    Ok((0..=m_max)
        .map(|m| {
            let p = (m + 1) as u32;
            let integral: C64 =
                samples.iter().map(|(w, phi)| w * phi.powu(p)).sum::<C64>() * (TAU / nodes as f64);
            integral * (2.0 * map.a1 / (m + 1) as f64)
        })
        .collect())
}

/// Image-charge sequences for two disjoint disks.
#[derive(Clone, Debug)]
pub struct TwoDiskSeries {
    pub z1: C64,
    pub rho1: f64,
    pub z2: C64,
    pub rho2: f64,
    /// `|z₁ − z₂|`.
    pub rho: f64,
    pub big_lambda1: f64,
    pub big_lambda2: f64,
    /// `(Λ₁ − Λ₂)² + 1 − 2(Λ₁ + Λ₂)`.
    pub big_lambda: f64,
    /// `λ_{j,n}` for `n = 0…N`.
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    /// `z_{j,n}` for `n = 0…N`.
    pub points1: Vec<C64>,
    pub points2: Vec<C64>,
    /// `κ_{j,n}` for `n = 1…N` stored at index `n − 1`.
    pub kappa1: Vec<C64>,
    pub kappa2: Vec<C64>,
    /// `α_{j,n}` for `n = 0…N`.
    pub alpha1: Vec<C64>,
    pub alpha2: Vec<C64>,
    /// Fitted decay `|κ_{1,n}| + |κ_{2,n}| ≤ C δⁿ`.
    pub delta: f64,
    pub decay_constant: f64,
    /// Geometric estimate of the discarded tail.
    pub tail_estimate: f64,
}

impl TwoDiskSeries {
    /// Number of `κ` terms kept.
    pub fn terms(&self) -> usize {
        self.kappa1.len()
    }

    /// `κ_{1,n}` (`n ≥ 1`).
    pub fn kappa1_at(&self, n: usize) -> C64 {
        self.kappa1[n - 1]
    }

    pub fn kappa2_at(&self, n: usize) -> C64 {
        self.kappa2[n - 1]
    }

    /// Closed-form limits `(λ_{1,∞}, λ_{2,∞})`.
    pub fn lambda_limits(&self) -> (f64, f64) {
        let s = self.big_lambda.sqrt();
        (
            0.5 * (1.0 + self.big_lambda1 - self.big_lambda2 + s),
            0.5 * (1.0 + self.big_lambda2 - self.big_lambda1 + s),
        )
    }
}

/// Builds the sequences until `|κ_{1,n}| + |κ_{2,n}| < tol`.
pub fn build_two_disk_series(
    z1: C64,
    rho1: f64,
    z2: C64,
    rho2: f64,
    tol: f64,
) -> Result<TwoDiskSeries> {
    let rho = (z1 - z2).norm();
    if !(rho > rho1 + rho2) || !(rho1 > 0.0) || !(rho2 > 0.0) {
        return Err(Error::DisksOverlap {
            distance: rho,
            radii: rho1 + rho2,
        });
    }
    let l1 = (rho1 / rho).powi(2);
    let l2 = (rho2 / rho).powi(2);
    let big_lambda = (l1 - l2).powi(2) + 1.0 - 2.0 * (l1 + l2);
    let d = (z2 - z1).conj().powi(2);
    let d21 = (z1 - z2).conj().powi(2);

    let mut lambda1 = vec![1.0];
    let mut lambda2 = vec![1.0];
    let mut kappa1 = vec![C64::new(2.0 * rho2 * rho2, 0.0)];
    let mut kappa2 = vec![C64::new(2.0 * rho1 * rho1, 0.0)];
    let max_terms = 100_000;
    let mut n = 1;
    loop {
        lambda1.push(1.0 - l2 / lambda2[n - 1]);
        lambda2.push(1.0 - l1 / lambda1[n - 1]);
        let sum = kappa1[n - 1].norm() + kappa2[n - 1].norm();
        if sum < tol || n >= max_terms {
            break;
        }
        // κ_{j,n+1} from κ_{j,n−1}, seeded by the two leading values
        let (k1, k2) = if n == 1 {
            let v = -2.0 * (rho1 * rho2).powi(2);
            (C64::from(v) / d, C64::from(v) / d21)
        } else {
            let m = n - 1;
            let f1 = l1 * l2 / (lambda2[m] * lambda1[m - 1]).powi(2);
            let f2 = l1 * l2 / (lambda1[m] * lambda2[m - 1]).powi(2);
            (kappa1[m - 1] * f1, kappa2[m - 1] * f2)
        };
        kappa1.push(k1);
        kappa2.push(k2);
        n += 1;
    }
    let terms = kappa1.len();
    lambda1.truncate(terms + 1);
    lambda2.truncate(terms + 1);
    let points1: Vec<C64> = lambda2.iter().map(|&l| z2 * (1.0 - l) + z1 * l).collect();
    let points2: Vec<C64> = lambda1.iter().map(|&l| z1 * (1.0 - l) + z2 * l).collect();
    let mut alpha1 = vec![-z1 * 2.0];
    let mut alpha2 = vec![-z2 * 2.0];
    for n in 1..=terms {
        alpha1.push(-kappa1[n - 1] * 0.5 / ((z1 - z2) * lambda1[n - 1]));
        alpha2.push(-kappa2[n - 1] * 0.5 / ((z2 - z1) * lambda2[n - 1]));
    }

    // least-squares fit of log(|κ₁| + |κ₂|) against n
    let logs: Vec<(f64, f64)> = (0..terms)
        .map(|i| ((i + 1) as f64, (kappa1[i].norm() + kappa2[i].norm()).ln()))
        .filter(|p| p.1.is_finite())
        .collect();
    let np = logs.len() as f64;
    let (mx, my) = logs
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / np, a.1 + p.1 / np));
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let delta = if sxx > 0.0 { (sxy / sxx).exp() } else { 0.0 };
    let decay_constant = logs
        .iter()
        .map(|p| (p.1 - p.0 * delta.ln()).exp())
        .fold(0.0, f64::max);
    let last = kappa1[terms - 1].norm() + kappa2[terms - 1].norm();
    let tail_estimate = if delta < 1.0 {
        last * delta / (1.0 - delta)
    } else {
        f64::INFINITY
    };

    Ok(TwoDiskSeries {
        z1,
        rho1,
        z2,
        rho2,
        rho,
        big_lambda1: l1,
        big_lambda2: l2,
        big_lambda,
        lambda1,
        lambda2,
        points1,
        points2,
        kappa1,
        kappa2,
        alpha1,
        alpha2,
        delta,
        decay_constant,
        tail_estimate,
    })
}

/// `{(z_{1,2n}, 2πκ_{2,2n+1})} ∪ {(z_{2,2n}, 2πκ_{1,2n+1})}`, disk 1 first.
pub fn two_disk_measure(series: &TwoDiskSeries) -> AtomicMeasure {
    let terms = series.terms();
    let mut atoms = Vec::new();
    for n in (0..).take_while(|n| 2 * n < terms) {
        atoms.push(Atom {
            z: series.points1[2 * n],
            c: series.kappa2_at(2 * n + 1) * TAU,
        });
    }
    for n in (0..).take_while(|n| 2 * n < terms) {
        atoms.push(Atom {
            z: series.points2[2 * n],
            c: series.kappa1_at(2 * n + 1) * TAU,
        });
    }
    AtomicMeasure::from_atoms(atoms)
}

/// `Σ 2π(ερ_i)² δ_{z_i}`; zero weights are dropped.
pub fn small_inclusion_measure(centers: &[C64], radii: &[f64], eps: f64) -> AtomicMeasure {
    let atoms = centers
        .iter()
        .zip(radii)
        .map(|(&z, &r)| Atom {
            z,
            c: C64::new(TAU * (eps * r).powi(2), 0.0),
        })
        .filter(|a| a.c.norm() > 0.0)
        .collect();
    AtomicMeasure::from_atoms(atoms)
}
