//! Machine-readable summary of a pipeline run.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::geometry::{point_in_polygon, Curve, Rescale};
use crate::prony::{Atom, AtomicMeasure, Disk};

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub assemble_s: f64,
    pub moments_s: f64,
    pub prony_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RescaleReport {
    pub scale: f64,
    pub shift: C64,
}

impl From<Rescale> for RescaleReport {
    fn from(r: Rescale) -> Self {
        Self {
            scale: r.scale,
            shift: r.shift,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub nodes_per_curve: usize,
    pub n_atoms: usize,
    pub rank: usize,
    pub suggested_atoms: usize,
    pub mass_convention: &'static str,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub rescale: RescaleReport,
    /// Moments in the working frame.
    pub moments: Vec<C64>,
    pub singular_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Atoms in the working frame.
    pub atoms: Vec<Atom>,
    /// Disks in the user frame.
    pub disks: Vec<Disk>,
    /// Share of `Σ|c_i|` carried by atoms inside some cavity.
    pub mass_inside_fraction: f64,
    pub timings: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Share of the absolute mass of `measure` whose nodes fall inside `cavities`.
pub fn mass_inside_fraction(measure: &AtomicMeasure, cavities: &[Curve]) -> f64 {
    let polys: Vec<Vec<C64>> = cavities.iter().map(|c| c.polyline(512)).collect();
    let total: f64 = measure.atoms.iter().map(|a| a.c.norm()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let inside: f64 = measure
        .atoms
        .iter()
        .filter(|a| polys.iter().any(|p| point_in_polygon(a.z, p)))
        .fold(0.0, |acc, a| acc + a.c.norm());
    inside / total
}
