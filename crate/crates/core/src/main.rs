use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cavity_moments::dtn::DtnPair;
use cavity_moments::error::{Error, Result};
use cavity_moments::geometry::Curve;
use cavity_moments::moments::{extract_moments, MassConvention, MomentSequence};
use cavity_moments::oracles::{build_two_disk_series, conformal_moments, two_disk_measure};
use cavity_moments::pipeline::{self, csv, svg, SceneConfig};

#[derive(Parser)]
#[command(
    name = "cavity-moments",
    version,
    about = "Cavity reconstruction from boundary measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full run: forward data, moments, atoms, disks, SVG and report.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Directory for outputs not given in the configuration.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Writes the DtN matrices Λ_γ, Λ_0 and R as CSV.
    Forward {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Writes the moment sequence τ_0 … τ_{2n−1}.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "moments.csv")]
        out: PathBuf,
    },
    /// Solves the Prony system for a moment file.
    Reconstruct {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long, default_value_t = 5)]
        n_atoms: usize,
        #[command(flatten)]
        prony: PronyArgs,
        #[arg(long, default_value = "atoms.csv")]
        out: PathBuf,
    },
    /// Reference moments for a single conformal cavity or two disks.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Truncation tolerance of the two-disk series.
        #[arg(long, default_value_t = 1e-14)]
        series_tol: f64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Draws the scene and a disk file.
    Render {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        atoms: Option<PathBuf>,
        #[arg(long, default_value = "scene.svg")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON scene description.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    n_atoms: Option<usize>,
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long)]
    noise_level: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    prony: PronyArgs,
}

#[derive(Args)]
struct PronyArgs {
    #[arg(long)]
    rank_tol: Option<f64>,
    #[arg(long)]
    dedup_tol: Option<f64>,
    #[arg(long)]
    weight_floor: Option<f64>,
    #[arg(long, value_enum)]
    mass_convention: Option<Convention>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    #[value(name = "2pi")]
    TwoPi,
    #[value(name = "4pi")]
    FourPi,
}

impl From<Convention> for MassConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::TwoPi => MassConvention::TwoPi,
            Convention::FourPi => MassConvention::FourPi,
        }
    }
}

impl PronyArgs {
    fn apply(&self, cfg: &mut SceneConfig) {
        if let Some(v) = self.rank_tol {
            cfg.prony.rank_tol = v;
        }
        if let Some(v) = self.dedup_tol {
            cfg.prony.dedup_tol = v;
        }
        if let Some(v) = self.weight_floor {
            cfg.prony.weight_floor = Some(v);
        }
        if let Some(v) = self.mass_convention {
            cfg.prony.mass_convention = v.into();
        }
    }
}

impl Common {
    fn load(&self) -> Result<SceneConfig> {
        let mut cfg = SceneConfig::from_path(&self.config)?;
        if let Some(v) = self.nodes {
            cfg.mesh.nodes_per_curve = v;
        }
        if let Some(v) = self.n_atoms {
            cfg.moments.n_atoms = v;
        }
        if let Some(v) = self.max_order {
            cfg.moments.max_order = v;
        }
        if let Some(v) = self.noise_level {
            cfg.noise.level = v;
        }
        if let Some(v) = self.seed {
            cfg.noise.seed = v;
        }
        self.prony.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pipeline { common, out_dir } => {
            let cfg = common.load()?;
            let out = pipeline::run_pipeline(&cfg)?;
            let paths = cfg.output.with_dir(&out_dir);
            out.write_outputs(&cfg, &paths)?;
            for d in &out.disks.disks {
                println!(
                    "center = {:+.6} {:+.6}i  radius = {:.6}  weight = {:.6e}",
                    d.center.re,
                    d.center.im,
                    d.radius,
                    d.weight.norm()
                );
            }
            println!(
                "rank {} (suggested {}), mass inside cavities {:.3}",
                out.report.rank, out.report.suggested_atoms, out.report.mass_inside_fraction
            );
        }
        Command::Forward { common, out_dir } => {
            let cfg = common.load()?;
            let (_, dtn) = pipeline::forward(&cfg)?;
            write_operators(&dtn, &cfg, &out_dir)?;
        }
        Command::Moments { common, out } => {
            let cfg = common.load()?;
            let (scene, dtn) = pipeline::forward(&cfg)?;
            let seq = extract_moments(&dtn, cfg.moments.n_atoms, scene.rescale)?;
            csv::write(
                &out,
                &csv::moments_csv(&seq, cfg.prony.mass_convention.label()),
            )?;
        }
        Command::Reconstruct {
            moments,
            n_atoms,
            prony,
            out,
        } => {
            let seq = csv::parse_moments_csv(&std::fs::read_to_string(&moments)?)?;
            let mut cfg = SceneConfig::from_json(
                r#"{"outer": {"kind": "circle", "center": [0, 0], "radius": 1}}"#,
            )?;
            cfg.moments.n_atoms = n_atoms;
            prony.apply(&mut cfg);
            let (_, _, disks) = pipeline::reconstruct(&seq, &cfg)?;
            csv::write(&out, &csv::atoms_csv(&disks))?;
        }
        Command::Oracle {
            common,
            series_tol,
            out_dir,
        } => {
            let cfg = common.load()?;
            oracle(&cfg, series_tol, &out_dir)?;
        }
        Command::Render { config, atoms, out } => {
            let cfg = SceneConfig::from_path(&config)?;
            let (outer, cavities) = cfg.curves()?;
            let mut curves = vec![outer];
            curves.extend(cavities);
            let disks = match atoms {
                Some(p) => {
                    csv::parse_atoms_csv(&std::fs::read_to_string(p)?, cfg.prony.mass_convention)?
                }
                None => cavity_moments::prony::DiskSet {
                    disks: vec![],
                    convention: cfg.prony.mass_convention,
                },
            };
            csv::write(&out, &svg::render(&curves, &disks))?;
        }
    }
    Ok(())
}

fn write_operators(dtn: &DtnPair, cfg: &SceneConfig, dir: &Path) -> Result<()> {
    let meta = [
        ("nodes_per_curve", cfg.mesh.nodes_per_curve.to_string()),
        ("noise_level", format!("{:.16e}", cfg.noise.level)),
        ("noise_seed", cfg.noise.seed.to_string()),
    ];
    for (name, op) in [
        ("lambda_gamma", &dtn.lambda_gamma),
        ("lambda_0", &dtn.lambda_0),
        ("r", &dtn.r),
    ] {
        csv::write(
            &dir.join(format!("{name}.csv")),
            &csv::matrix_csv(name, &op.matrix, &meta),
        )?;
    }
    Ok(())
}

/// Reference moments in the working frame of the scene.
fn oracle(cfg: &SceneConfig, series_tol: f64, dir: &Path) -> Result<()> {
    let scene = cfg.build_scene()?;
    let count = 2 * cfg.moments.n_atoms;
    let mut seq = match scene.cavities.as_slice() {
        [one] => {
            let map = one.laurent_map().ok_or_else(|| {
                Error::OracleNotApplicable(format!("a {} has no finite conformal map", one.kind()))
            })?;
            MomentSequence::from_values(conformal_moments(&map, count - 1)?)
        }
        [Curve::Circle {
            center: z1,
            radius: r1,
        }, Curve::Circle {
            center: z2,
            radius: r2,
        }] => {
            let series = build_two_disk_series(*z1, *r1, *z2, *r2, series_tol)?;
            csv::write(
                &dir.join("two_disk_series.csv"),
                &csv::two_disk_csv(&series),
            )?;
            MomentSequence::from_values(two_disk_measure(&series).moments(count))
        }
        _ => {
            return Err(Error::OracleNotApplicable(
                "needs one cavity with a conformal map or exactly two circles".into(),
            ))
        }
    };
    seq.rescale = scene.rescale;
    csv::write(
        &dir.join("oracle_moments.csv"),
        &csv::moments_csv(&seq, "4pi"),
    )?;
    Ok(())
}
