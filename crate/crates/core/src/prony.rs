//! Shape from moments: atoms `(z_i, c_i)` with `Σ c_i z_iᵐ = τ_m`.
//!
//! Nodes are the eigenvalues of the Hankel pencil `(H₁, H₀)` reduced to the
//! numerical range of `H₀`; weights follow from a Vandermonde least-squares
//! fit against every available moment. Moments are first rescaled by
//! `τ_m ↦ τ_m / sᵐ` so that the Hankel entries have comparable size.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::eigen::{eigenvalues, polynomial_roots};
use crate::error::{Error, Result};
use crate::geometry::Rescale;
use crate::moments::MassConvention;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PronyOptions {
    /// Singular values of `H₀` below `rank_tol·σ₁` are discarded.
    pub rank_tol: f64,
    /// Atoms closer than this are merged.
    pub dedup_tol: f64,
}

impl Default for PronyOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub z: C64,
    pub c: C64,
}

/// `ν* = Σ c_i δ_{z_i}` together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    pub requested: usize,
    pub rank: usize,
    /// Singular values of the normalized `H₀`.
    pub singular_values: Vec<f64>,
    /// `|Σ c_i z_iᵐ − τ_m|` for every input moment.
    pub residuals: Vec<f64>,
    pub tau0: C64,
}

impl AtomicMeasure {
    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        let n = atoms.len();
        let tau0 = atoms.iter().map(|a| a.c).sum();
        Self {
            atoms,
            requested: n,
            rank: n,
            singular_values: Vec::new(),
            residuals: Vec::new(),
            tau0,
        }
    }

    pub fn moments(&self, count: usize) -> Vec<C64> {
        forward_moments(&self.atoms, count)
    }

    pub fn total_mass(&self) -> C64 {
        self.atoms.iter().map(|a| a.c).sum()
    }
}

/// `τ_m = Σ c_i z_iᵐ` for `m < count`.
pub fn forward_moments(atoms: &[Atom], count: usize) -> Vec<C64> {
    (0..count)
        .map(|m| atoms.iter().map(|a| a.c * a.z.powu(m as u32)).sum())
        .collect()
}

struct Normalized {
    t: Vec<C64>,
    scale: f64,
    norm: f64,
}

fn normalize(tau: &[C64]) -> Result<Normalized> {
    let norm = tau.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if !norm.is_finite() {
        return Err(Error::Config("moments must be finite".into()));
    }
    if norm == 0.0 {
        return Err(Error::RankZero);
    }
    let t0 = tau[0].norm();
    let scale = if t0 > 1e-14 * norm {
        tau.iter()
            .enumerate()
            .skip(1)
            .map(|(m, t)| (t.norm() / t0).powf(1.0 / m as f64))
            .fold(0.0, f64::max)
    } else {
        1.0
    };
    let scale = if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    };
    let t = tau
        .iter()
        .enumerate()
        .map(|(m, v)| v / (norm * scale.powi(m as i32)))
        .collect();
    Ok(Normalized { t, scale, norm })
}

fn hankel(t: &[C64], n: usize, shift: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| t[i + j + shift])
}

fn check_len(tau: &[C64], n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config(
            "the number of atoms must be at least 1".into(),
        ));
    }
    if tau.len() < 2 * n {
        return Err(Error::NotEnoughMoments {
            needed: 2 * n,
            got: tau.len(),
        });
    }
    Ok(())
}

/// Least-squares weights for fixed nodes `λ` against normalized moments.
fn fit_weights(nodes: &[C64], t: &[C64]) -> Result<Vec<C64>> {
    let v = DMatrix::from_fn(t.len(), nodes.len(), |m, i| nodes[i].powu(m as u32));
    let rhs = DMatrix::from_column_slice(t.len(), 1, t);
    let svd = v.svd(true, true);
    let w = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::SingularSystem(format!("vandermonde fit: {e}")))?;
    Ok(w.column(0).iter().copied().collect())
}

/// Solves the truncated Prony system with `n` atoms.
pub fn solve_prony(tau: &[C64], n: usize, opts: PronyOptions) -> Result<AtomicMeasure> {
    check_len(tau, n)?;
    let norm = normalize(&tau[..2 * n])?;
    let h0 = hankel(&norm.t, n, 0);
    let h1 = hankel(&norm.t, n, 1);
    let svd = h0.svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let s1 = sv[order[0]];
    if !(s1 > 0.0) {
        return Err(Error::RankZero);
    }
    let keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| sv[k] > opts.rank_tol * s1)
        .collect();
    let rank = keep.len();
    if rank < n {
        log::warn!("Hankel matrix has numerical rank {rank} < {n}; reducing the number of atoms");
    }
    let u = svd.u.as_ref().expect("left vectors requested");
    let vt = svd.v_t.as_ref().expect("right vectors requested");
    let ur = u.select_columns(&keep);
    let vr = vt.select_rows(&keep).adjoint();
    let mut b = ur.adjoint() * &h1 * vr;
    for (r, &k) in keep.iter().enumerate() {
        let inv = 1.0 / sv[k];
        b.row_mut(r).iter_mut().for_each(|z| *z *= inv);
    }
    let mut nodes = eigenvalues(&b)?;

    // merge near-duplicates in the moment frame, then refit
    let tol = opts.dedup_tol / norm.scale;
    let mut merged: Vec<C64> = Vec::with_capacity(nodes.len());
    for z in nodes.drain(..) {
        if !merged.iter().any(|m| (m - z).norm() < tol) {
            merged.push(z);
        }
    }
    let nodes = merged;
    // refit against every supplied moment in the common normalization
    let t_all: Vec<C64> = tau
        .iter()
        .enumerate()
        .map(|(m, v)| v / (norm.norm * norm.scale.powi(m as i32)))
        .collect();
    let w = fit_weights(&nodes, &t_all)?;
    let atoms: Vec<Atom> = nodes
        .iter()
        .zip(&w)
        .map(|(l, c)| Atom {
            z: l * norm.scale,
            c: c * norm.norm,
        })
        .collect();
    let fitted = forward_moments(&atoms, tau.len());
    let residuals = fitted
        .iter()
        .zip(tau)
        .map(|(a, b)| (a - b).norm())
        .collect();
    Ok(AtomicMeasure {
        atoms,
        requested: n,
        rank,
        singular_values: order.iter().map(|&k| sv[k]).collect(),
        residuals,
        tau0: tau[0],
    })
}

/// Nodes from the Prony polynomial: solve `H₀a = −(τ_n … τ_{2n−1})` and take
/// the roots of `zⁿ + Σ a_k z^k`.
pub fn prony_polynomial_roots(tau: &[C64], n: usize) -> Result<Vec<C64>> {
    check_len(tau, n)?;
    let norm = normalize(&tau[..2 * n])?;
    let h0 = hankel(&norm.t, n, 0);
    let rhs = DMatrix::from_fn(n, 1, |m, _| -norm.t[m + n]);
    let a = h0
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("Hankel matrix is singular".into()))?;
    let coeffs: Vec<C64> = a.column(0).iter().copied().collect();
    Ok(polynomial_roots(&coeffs)?
        .into_iter()
        .map(|z| z * norm.scale)
        .collect())
}

/// Rank of `H₀` at the given tolerance, as a hint for the number of atoms.
pub fn suggest_atoms(tau: &[C64], rank_tol: f64) -> Result<usize> {
    let n = tau.len() / 2;
    if n == 0 {
        return Ok(0);
    }
    let norm = normalize(&tau[..2 * n])?;
    let sv = hankel(&norm.t, n, 0).singular_values();
    let s1 = sv.max();
    Ok(sv.iter().filter(|&&s| s > rank_tol * s1).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Disk {
    pub center: C64,
    pub radius: f64,
    pub weight: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiskSet {
    pub disks: Vec<Disk>,
    pub convention: MassConvention,
}

/// Disks of radius `√(|c|/κ)`; atoms lighter than `weight_floor` get radius 0.
pub fn atoms_to_disks(
    measure: &AtomicMeasure,
    convention: MassConvention,
    weight_floor: f64,
) -> DiskSet {
    let kappa = convention.kappa();
    DiskSet {
        disks: measure
            .atoms
            .iter()
            .map(|a| Disk {
                center: a.z,
                radius: if a.c.norm() < weight_floor {
                    0.0
                } else {
                    (a.c.norm() / kappa).sqrt()
                },
                weight: a.c,
            })
            .collect(),
        convention,
    }
}

/// Default weight floor `10⁻⁸·|τ₀|`.
pub fn default_weight_floor(tau0: C64) -> f64 {
    1e-8 * tau0.norm()
}

/// Maps disks from the working frame back to the user frame.
pub fn inverse_rescale(disks: &DiskSet, rescale: &Rescale) -> DiskSet {
    let s = rescale.scale;
    DiskSet {
        disks: disks
            .disks
            .iter()
            .map(|d| Disk {
                center: rescale.invert(d.center),
                radius: d.radius / s,
                weight: d.weight / (s * s),
            })
            .collect(),
        convention: disks.convention,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn atoms(list: &[(C64, C64)]) -> Vec<Atom> {
        list.iter().map(|&(z, c)| Atom { z, c }).collect()
    }

    fn closest(found: &[Atom], z: C64) -> &Atom {
        found
            .iter()
            .min_by(|a, b| (a.z - z).norm().total_cmp(&(b.z - z).norm()))
            .unwrap()
    }

    #[test]
    fn one_atom_is_a_ratio() {
        let truth = atoms(&[(c(0.2, 0.1), c(3.0, 0.0))]);
        let tau = forward_moments(&truth, 2);
        let m = solve_prony(&tau, 1, PronyOptions::default()).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert!((m.atoms[0].z - c(0.2, 0.1)).norm() < 1e-12);
        assert!((m.atoms[0].c - 3.0).norm() < 1e-12);
        assert!(m.residuals.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn two_atoms_and_rank_overshoot() {
        let truth = atoms(&[(c(0.1, 0.0), c(1.0, 0.0)), (c(-0.2, 0.3), c(2.0, 0.0))]);
        let tau = forward_moments(&truth, 4);
        let m = solve_prony(&tau, 2, PronyOptions::default()).unwrap();
        for a in &truth {
            let f = closest(&m.atoms, a.z);
            assert!((f.z - a.z).norm() < 1e-10);
            assert!((f.c - a.c).norm() < 1e-10);
        }
        let tau6 = forward_moments(&truth, 6);
        let m = solve_prony(&tau6, 3, PronyOptions::default()).unwrap();
        assert_eq!(m.rank, 2);
        assert_eq!(m.atoms.len(), 2);
        assert_eq!(suggest_atoms(&tau6, 1e-10).unwrap(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            solve_prony(&[c(0.0, 0.0); 4], 2, PronyOptions::default()),
            Err(Error::RankZero)
        ));
        assert!(matches!(
            solve_prony(&[c(1.0, 0.0); 3], 2, PronyOptions::default()),
            Err(Error::NotEnoughMoments { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn polynomial_route_agrees() {
        let truth = atoms(&[
            (c(0.1, 0.05), c(1.0, 0.0)),
            (c(-0.2, 0.3), c(0.5, 0.2)),
            (c(0.3, -0.25), c(1.5, 0.0)),
        ]);
        let tau = forward_moments(&truth, 6);
        let m = solve_prony(&tau, 3, PronyOptions::default()).unwrap();
        let roots = prony_polynomial_roots(&tau, 3).unwrap();
        for a in &m.atoms {
            assert!(roots.iter().any(|r| (r - a.z).norm() < 1e-8));
        }
    }

    #[test]
    fn disks_from_atoms() {
        let m = AtomicMeasure::from_atoms(atoms(&[
            (c(0.0, 0.0), c(TAU * 0.01, 0.0)),
            (c(0.1, 0.0), c(0.0, 0.0)),
        ]));
        let d = atoms_to_disks(&m, MassConvention::TwoPi, 1e-12);
        assert!((d.disks[0].radius - 0.1).abs() < 1e-15);
        assert_eq!(d.disks[1].radius, 0.0);
        let m = AtomicMeasure::from_atoms(atoms(&[(c(0.0, 0.0), c(4.0 * PI * 0.01, 0.0))]));
        let d = atoms_to_disks(&m, MassConvention::FourPi, 1e-12);
        assert!((d.disks[0].radius - 0.1).abs() < 1e-15);
    }

    #[test]
    fn inverse_rescale_examples() {
        let set = DiskSet {
            disks: vec![Disk {
                center: c(0.2, 0.0),
                radius: 0.05,
                weight: c(1.0, 0.0),
            }],
            convention: MassConvention::FourPi,
        };
        assert_eq!(inverse_rescale(&set, &Rescale::identity()), set);
        let map = Rescale {
            scale: 0.5,
            shift: c(0.0, 0.0),
        };
        let back = inverse_rescale(&set, &map);
        assert!((back.disks[0].center - c(0.4, 0.0)).norm() < 1e-15);
        assert!((back.disks[0].radius - 0.1).abs() < 1e-15);
        assert!((back.disks[0].weight - 4.0).norm() < 1e-15);
        let map = Rescale {
            scale: 0.3,
            shift: c(0.1, -0.2),
        };
        let there = DiskSet {
            disks: back
                .disks
                .iter()
                .map(|d| Disk {
                    center: map.apply(d.center),
                    radius: d.radius * 0.3,
                    weight: d.weight * 0.09,
                })
                .collect(),
            convention: back.convention,
        };
        let again = inverse_rescale(&there, &map);
        assert!((again.disks[0].center - back.disks[0].center).norm() < 1e-15);
    }

    fn well_separated(points: &[(f64, f64)], sep: f64) -> bool {
        points.iter().enumerate().all(|(i, a)| {
            points[i + 1..]
                .iter()
                .all(|b| c(a.0 - b.0, a.1 - b.1).norm() >= sep)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn exact_on_atomic_input(
            pts in proptest::collection::vec((-0.6f64..0.6, -0.6f64..0.6, 0.1f64..2.0), 1..6),
        ) {
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
            prop_assume!(well_separated(&xy, 0.1));
            let truth: Vec<Atom> = pts.iter().map(|p| Atom { z: c(p.0, p.1), c: c(p.2, 0.0) }).collect();
            let tau = forward_moments(&truth, 2 * truth.len());
            let m = solve_prony(&tau, truth.len(), PronyOptions::default()).unwrap();
            prop_assert_eq!(m.atoms.len(), truth.len());
            for a in &truth {
                let f = closest(&m.atoms, a.z);
                prop_assert!((f.z - a.z).norm() < 1e-8);
            }
        }

        #[test]
        fn conjugation_equivariance(
            pts in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5, 0.1f64..2.0, -1.0f64..1.0), 1..5),
        ) {
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
            prop_assume!(well_separated(&xy, 0.15));
            let truth: Vec<Atom> = pts.iter().map(|p| Atom { z: c(p.0, p.1), c: c(p.2, p.3) }).collect();
            let tau = forward_moments(&truth, 2 * truth.len());
            let conj: Vec<C64> = tau.iter().map(|t| t.conj()).collect();
            let a = solve_prony(&tau, truth.len(), PronyOptions::default()).unwrap();
            let b = solve_prony(&conj, truth.len(), PronyOptions::default()).unwrap();
            for x in &a.atoms {
                let y = closest(&b.atoms, x.z.conj());
                prop_assert!((y.z - x.z.conj()).norm() < 1e-8);
                prop_assert!((y.c - x.c.conj()).norm() < 1e-8 * (1.0 + x.c.norm()));
            }
        }
    }
}
