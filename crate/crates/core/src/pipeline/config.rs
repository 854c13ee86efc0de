//! JSON scene configuration.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Curve, LaurentMap, Scene};
use crate::moments::{MassConvention, MAX_MOMENT_ORDER};

/// One boundary curve. Complex numbers are written `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        center: C64,
        radius: f64,
    },
    Ellipse {
        center: C64,
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    RoundedRectangle {
        center: C64,
        width: f64,
        height: f64,
        #[serde(default)]
        corner_radius: Option<f64>,
        #[serde(default)]
        rotation: f64,
    },
    TrigPolynomial {
        center: C64,
        x: Vec<[f64; 2]>,
        y: Vec<[f64; 2]>,
    },
    Clover {
        center: C64,
        r0: f64,
        amplitude: f64,
        #[serde(default = "default_lobes")]
        lobes: usize,
        #[serde(default)]
        rotation: f64,
    },
    LaurentMap {
        a1: f64,
        a0: C64,
        #[serde(default)]
        negative: Vec<C64>,
    },
}

fn default_lobes() -> usize {
    4
}

impl CurveSpec {
    pub fn to_curve(&self) -> Result<Curve> {
        Ok(match self {
            CurveSpec::Circle { center, radius } => Curve::circle(*center, *radius),
            CurveSpec::Ellipse {
                center,
                semi_axes,
                rotation,
            } => Curve::ellipse(*center, semi_axes[0], semi_axes[1], *rotation),
            CurveSpec::RoundedRectangle {
                center,
                width,
                height,
                corner_radius,
                rotation,
            } => Curve::rounded_rectangle(*center, *width, *height, *corner_radius, *rotation),
            CurveSpec::TrigPolynomial { center, x, y } => Curve::TrigPolynomial {
                center: *center,
                x: x.iter().map(|c| (c[0], c[1])).collect(),
                y: y.iter().map(|c| (c[0], c[1])).collect(),
            },
            CurveSpec::Clover {
                center,
                r0,
                amplitude,
                lobes,
                rotation,
            } => {
                if *lobes == 0 {
                    return Err(Error::InvalidCurveParameters(
                        "clover needs at least one lobe".into(),
                    ));
                }
                Curve::clover(*center, *r0, *amplitude, *lobes, *rotation)
            }
            CurveSpec::LaurentMap { a1, a0, negative } => {
                Curve::LaurentMap(LaurentMap::new(*a1, *a0, negative.clone())?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub nodes_per_curve: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            nodes_per_curve: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub n_atoms: usize,
    pub max_order: usize,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            n_atoms: 5,
            max_order: MAX_MOMENT_ORDER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PronyConfig {
    pub rank_tol: f64,
    /// Absolute floor; `None` means `10⁻⁸·|τ₀|`.
    pub weight_floor: Option<f64>,
    pub mass_convention: MassConvention,
    pub dedup_tol: f64,
}

impl Default for PronyConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            weight_floor: None,
            mass_convention: MassConvention::default(),
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub level: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub moments_csv: Option<PathBuf>,
    pub atoms_csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl OutputConfig {
    /// Fills unset paths with the standard names inside `dir`.
    pub fn with_dir(&self, dir: &Path) -> OutputConfig {
        let pick =
            |p: &Option<PathBuf>, name: &str| Some(p.clone().unwrap_or_else(|| dir.join(name)));
        OutputConfig {
            moments_csv: pick(&self.moments_csv, "moments.csv"),
            atoms_csv: pick(&self.atoms_csv, "atoms.csv"),
            svg: pick(&self.svg, "reconstruction.svg"),
            report: pick(&self.report, "report.json"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub outer: CurveSpec,
    #[serde(default)]
    pub cavities: Vec<CurveSpec>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub moments: MomentsConfig,
    #[serde(default)]
    pub prony: PronyConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Curves in the user frame, outer boundary first.
    pub fn curves(&self) -> Result<(Curve, Vec<Curve>)> {
        let outer = self.outer.to_curve()?;
        let cavities = self
            .cavities
            .iter()
            .map(CurveSpec::to_curve)
            .collect::<Result<Vec<_>>>()?;
        Ok((outer, cavities))
    }

    pub fn build_scene(&self) -> Result<Scene> {
        let (outer, cavities) = self.curves()?;
        Scene::build(outer, cavities)
    }

    pub fn validate(&self) -> Result<()> {
        if self.moments.n_atoms == 0 {
            return Err(Error::Config("moments.n_atoms must be at least 1".into()));
        }
        if 2 * self.moments.n_atoms > self.moments.max_order {
            return Err(Error::Config(format!(
                "2·n_atoms = {} exceeds moments.max_order = {}",
                2 * self.moments.n_atoms,
                self.moments.max_order
            )));
        }
        if !(self.prony.rank_tol > 0.0 && self.prony.rank_tol < 1.0) {
            return Err(Error::Config("prony.rank_tol must lie in (0, 1)".into()));
        }
        if !(self.noise.level >= 0.0 && self.noise.level.is_finite()) {
            return Err(Error::Config(
                "noise.level must be a finite non-negative number".into(),
            ));
        }
        if !self.mesh.nodes_per_curve.is_multiple_of(2) || self.mesh.nodes_per_curve < 16 {
            return Err(Error::OddNodeCount(self.mesh.nodes_per_curve));
        }
        Ok(())
    }
}
