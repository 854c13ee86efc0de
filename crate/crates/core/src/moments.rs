//! Harmonic moments of the cavity measure from DtN data.
//!
//! With `Q^m = Tr⁰_Γ(z^m)` and `g = (Id + 𝖱)⁻¹𝖱Q¹`,
//! `τ_m = ⟨Q^{m+1}, g⟩_{1/2,Γ} / (m + 1)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dtn::{DtnPair, Noise};
use crate::error::{Error, Result};
use crate::field::{apply_real, join, split, BoundaryField};
use crate::geometry::Rescale;
use crate::linalg::Factorized;
use crate::trace::TraceSpace;

/// Highest moment order accepted by default.
pub const MAX_MOMENT_ORDER: usize = 64;

/// Mass-to-radius convention `ρ = √(|c| / κ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassConvention {
    /// `κ = 2π`, the small-inclusion normalization.
    TwoPi,
    /// `κ = 4π`, the exact mass of a disk under this pairing.
    #[default]
    FourPi,
}

impl MassConvention {
    pub fn kappa(self) -> f64 {
        match self {
            MassConvention::TwoPi => std::f64::consts::TAU,
            MassConvention::FourPi => 2.0 * std::f64::consts::TAU,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MassConvention::TwoPi => "2pi",
            MassConvention::FourPi => "4pi",
        }
    }
}

/// `τ_0 … τ_{2n−1}` with the data they were computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub values: Vec<C64>,
    pub nodes_per_curve: usize,
    pub noise: Option<Noise>,
    /// Map from the user frame to the frame the moments live in.
    pub rescale: Rescale,
}

impl MomentSequence {
    pub fn from_values(values: Vec<C64>) -> Self {
        Self {
            values,
            nodes_per_curve: 0,
            noise: None,
            rescale: Rescale::identity(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `Q^m = Tr⁰_Γ(z^m)` on the outer grid.
pub fn build_q(space: &TraceSpace, m: u32) -> BoundaryField {
    space.trace0_of(|z| z.powu(m))
}

/// Moment extraction on the outer boundary; reuses one factorization of `Id + 𝖱`.
pub struct MomentExtractor<'a> {
    dtn: &'a DtnPair,
    space: TraceSpace,
    max_order: usize,
}

impl<'a> MomentExtractor<'a> {
    pub fn new(dtn: &'a DtnPair) -> Result<Self> {
        let space = TraceSpace::with_single_layer(dtn.single_outer.clone())?;
        Ok(Self {
            dtn,
            space,
            max_order: MAX_MOMENT_ORDER,
        })
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn space(&self) -> &TraceSpace {
        &self.space
    }

    /// `g = (Id + 𝖱)⁻¹𝖱Q¹`.
    pub fn response(&self) -> Result<BoundaryField> {
        let r = &self.dtn.r.matrix;
        let m = r.nrows();
        let q1 = build_q(&self.space, 1);
        let rq = apply_real(r, &q1.values);
        let a = DMatrix::<f64>::identity(m, m) + r;
        let fact = Factorized::new(a, "Id + R (inconsistent data?)")?;
        let (re, im) = split(&rq);
        let g = join(&fact.solve_vec(&re)?, &fact.solve_vec(&im)?);
        Ok(BoundaryField::new(self.space.grid.clone(), g))
    }

    /// `τ_0 … τ_{count−1}`.
    pub fn moments(&self, count: usize) -> Result<Vec<C64>> {
        if count > self.max_order {
            return Err(Error::Config(format!(
                "{count} moments requested, the maximum order is {}",
                self.max_order
            )));
        }
        let g = self.response()?;
        (0..count)
            .map(|m| {
                let q = build_q(&self.space, m as u32 + 1);
                Ok(self.space.inner_half(&q, &g)? / (m as f64 + 1.0))
            })
            .collect()
    }
}

/// `τ_0 … τ_{2n−1}` for an `n`-atom reconstruction.
pub fn extract_moments(dtn: &DtnPair, n_atoms: usize, rescale: Rescale) -> Result<MomentSequence> {
    if n_atoms == 0 {
        return Err(Error::Config(
            "the number of atoms must be at least 1".into(),
        ));
    }
    let values = MomentExtractor::new(dtn)?.moments(2 * n_atoms)?;
    let seq = MomentSequence {
        values,
        nodes_per_curve: dtn.outer().blocks[0].nodes,
        noise: dtn.noise,
        rescale,
    };
    if let Some(t0) = seq.values.first() {
        if t0.re < 0.0 || t0.im.abs() > 1e-6 * t0.norm() {
            log::warn!("tau_0 = {t0} is not a positive real number");
        }
    }
    Ok(seq)
}
