//! End-to-end driver: scene → DtN pair → moments → atoms → disks.

pub mod config;
pub mod csv;
pub mod report;
pub mod svg;

use std::time::Instant;

use crate::dtn::{assemble_dtn, DtnOptions, DtnPair, Noise};
use crate::error::Result;
use crate::geometry::Scene;
use crate::moments::{extract_moments, MomentSequence};
use crate::prony::{
    atoms_to_disks, default_weight_floor, inverse_rescale, solve_prony, suggest_atoms,
    AtomicMeasure, DiskSet, PronyOptions,
};

pub use config::{CurveSpec, SceneConfig};
pub use report::{mass_inside_fraction, RunReport, Timings};

/// Everything produced by one run.
pub struct PipelineOutput {
    pub scene: Scene,
    pub dtn: DtnPair,
    pub moments: MomentSequence,
    pub measure: AtomicMeasure,
    /// Disks in the working frame.
    pub disks_working: DiskSet,
    /// Disks in the user frame.
    pub disks: DiskSet,
    pub report: RunReport,
}

pub fn noise_of(cfg: &SceneConfig) -> Option<Noise> {
    (cfg.noise.level > 0.0).then_some(Noise {
        level: cfg.noise.level,
        seed: cfg.noise.seed,
    })
}

/// Assembles the DtN pair for a validated configuration.
pub fn forward(cfg: &SceneConfig) -> Result<(Scene, DtnPair)> {
    cfg.validate()?;
    let scene = cfg.build_scene()?;
    let dtn = assemble_dtn(
        &scene,
        cfg.mesh.nodes_per_curve,
        DtnOptions {
            with_interaction: false,
            noise: noise_of(cfg),
        },
    )?;
    Ok((scene, dtn))
}

/// Atoms and disks from a moment sequence.
pub fn reconstruct(
    seq: &MomentSequence,
    cfg: &SceneConfig,
) -> Result<(AtomicMeasure, DiskSet, DiskSet)> {
    let measure = solve_prony(
        &seq.values,
        cfg.moments.n_atoms,
        PronyOptions {
            rank_tol: cfg.prony.rank_tol,
            dedup_tol: cfg.prony.dedup_tol,
        },
    )?;
    let floor = cfg
        .prony
        .weight_floor
        .unwrap_or_else(|| default_weight_floor(measure.tau0));
    let working = atoms_to_disks(&measure, cfg.prony.mass_convention, floor);
    let user = inverse_rescale(&working, &seq.rescale);
    Ok((measure, working, user))
}

pub fn run_pipeline(cfg: &SceneConfig) -> Result<PipelineOutput> {
    let t = Instant::now();
    let (scene, dtn) = forward(cfg)?;
    let assemble_s = t.elapsed().as_secs_f64();
    log::info!("assembled DtN pair in {assemble_s:.2}s");

    let t = Instant::now();
    let moments = extract_moments(&dtn, cfg.moments.n_atoms, scene.rescale)?;
    let moments_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (measure, disks_working, disks) = reconstruct(&moments, cfg)?;
    let prony_s = t.elapsed().as_secs_f64();
    let suggested = suggest_atoms(&moments.values, cfg.prony.rank_tol)?;

    let mass_inside = mass_inside_fraction(&measure, &scene.cavities);
    let report = RunReport {
        nodes_per_curve: cfg.mesh.nodes_per_curve,
        n_atoms: cfg.moments.n_atoms,
        rank: measure.rank,
        suggested_atoms: suggested,
        mass_convention: cfg.prony.mass_convention.label(),
        noise_level: cfg.noise.level,
        noise_seed: cfg.noise.seed,
        rescale: scene.rescale.into(),
        moments: moments.values.clone(),
        singular_values: measure.singular_values.clone(),
        residuals: measure.residuals.clone(),
        atoms: measure.atoms.clone(),
        disks: disks.disks.clone(),
        mass_inside_fraction: mass_inside,
        timings: Timings {
            assemble_s,
            moments_s,
            prony_s,
        },
    };
    Ok(PipelineOutput {
        scene,
        dtn,
        moments,
        measure,
        disks_working,
        disks,
        report,
    })
}

impl PipelineOutput {
    /// Writes every output the configuration asks for.
    pub fn write_outputs(&self, cfg: &SceneConfig, out: &config::OutputConfig) -> Result<()> {
        let label = cfg.prony.mass_convention.label();
        if let Some(p) = &out.moments_csv {
            csv::write(p, &csv::moments_csv(&self.moments, label))?;
        }
        if let Some(p) = &out.atoms_csv {
            csv::write(p, &csv::atoms_csv(&self.disks))?;
        }
        if let Some(p) = &out.svg {
            let (outer, cavities) = cfg.curves()?;
            let mut curves = vec![outer];
            curves.extend(cavities);
            csv::write(p, &svg::render(&curves, &self.disks))?;
        }
        if let Some(p) = &out.report {
            csv::write(p, &self.report.to_json())?;
        }
        Ok(())
    }
}
