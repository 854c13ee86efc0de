//! Trace spaces on multiply connected boundaries.
//!
//! The augmented single-layer system
//!
//! ```text
//! 𝖲q̂ + c = f          (c constant on each curve)
//! ⟨q̂_k, 1⟩ = b_k      (circulation on each curve)
//! ```
//!
//! is factorized once per grid. From it come the equilibrium densities, the
//! projections `Π̂`, `Π` and the `H^{1/2}` pairing `⟨p, q⟩ = ∫ (𝖲⁻¹p) q̄`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::field::{join, split, BoundaryField, BoundaryOperator};
use crate::geometry::BoundaryGrid;
use crate::kernels::assemble_single_layer;
use crate::linalg::Factorized;

/// Relative off-space component of an input tolerated before a warning.
const OFF_SPACE_WARN: f64 = 1e-8;

/// Equilibrium densities `ψ̂⁽ᵏ⁾` and the constants `φ⁽ⁱ⁾_j = 𝖲ψ̂⁽ⁱ⁾|_{γ_j}`.
#[derive(Clone, Debug)]
pub struct EquilibriumBasis {
    pub densities: Vec<BoundaryField>,
    pub constants: DMatrix<f64>,
}

/// Factorized augmented system together with its equilibrium basis.
pub struct TraceSpace {
    pub grid: Arc<BoundaryGrid>,
    pub single: BoundaryOperator,
    system: Factorized,
    pub basis: EquilibriumBasis,
}

impl TraceSpace {
    /// Assembles `𝖲` on the grid and factorizes the augmented system.
    pub fn new(grid: Arc<BoundaryGrid>) -> Result<Self> {
        let single = assemble_single_layer(&grid, &grid);
        Self::with_single_layer(single)
    }

    pub fn with_single_layer(single: BoundaryOperator) -> Result<Self> {
        let grid = single.source.clone();
        let n = grid.len();
        let nc = grid.curve_count();
        let mut a = DMatrix::<f64>::zeros(n + nc, n + nc);
        a.view_mut((0, 0), (n, n)).copy_from(&single.matrix);
        for i in 0..n {
            let k = grid.curve_of[i];
            a[(i, n + k)] = 1.0;
            a[(n + k, i)] = grid.weights[i];
        }
        let system = Factorized::new(a, "augmented single-layer system")?;
        let mut space = TraceSpace {
            grid: grid.clone(),
            single,
            system,
            basis: EquilibriumBasis {
                densities: Vec::new(),
                constants: DMatrix::zeros(nc, nc),
            },
        };
        let zero = vec![C64::new(0.0, 0.0); n];
        for k in 0..nc {
            let mut b = vec![C64::new(0.0, 0.0); nc];
            b[k] = C64::new(1.0, 0.0);
            let (q, c) = space.solve(&zero, &b)?;
            for j in 0..nc {
                space.basis.constants[(k, j)] = -c[j].re;
            }
            space
                .basis
                .densities
                .push(BoundaryField::new(grid.clone(), q));
        }
        Ok(space)
    }

    pub fn curve_count(&self) -> usize {
        self.grid.curve_count()
    }

    fn solve_real(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.system.solve_vec(rhs)
    }

    /// Solves the augmented system for `(q̂, c)`.
    pub fn solve(&self, f: &[C64], b: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
        let n = self.grid.len();
        assert_eq!(f.len(), n);
        assert_eq!(b.len(), self.curve_count());
        let mut rhs: Vec<C64> = f.to_vec();
        rhs.extend_from_slice(b);
        let (re, im) = split(&rhs);
        let x = join(&self.solve_real(&re)?, &self.solve_real(&im)?);
        Ok((x[..n].to_vec(), x[n..].to_vec()))
    }

    /// Zero-circulation density whose single layer equals `p` up to per-curve constants.
    pub fn density_of(&self, p: &BoundaryField) -> Result<BoundaryField> {
        let zero = vec![C64::new(0.0, 0.0); self.curve_count()];
        let (q, _) = self.solve(&p.values, &zero)?;
        Ok(BoundaryField::new(self.grid.clone(), q))
    }

    /// Dense matrix of `p ↦ density_of(p)`.
    pub fn density_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.grid.len();
        let mut rhs = DMatrix::zeros(n + self.curve_count(), n);
        rhs.view_mut((0, 0), (n, n)).fill_with_identity();
        Ok(self.system.solve(&rhs)?.rows(0, n).into_owned())
    }

    /// Bilinear `⟨ψ̂⁽ᵏ⁾, q⟩ = Σ w ψ̂⁽ᵏ⁾ q` over the whole grid.
    pub fn equilibrium_pairing(&self, k: usize, q: &BoundaryField) -> C64 {
        let psi = &self.basis.densities[k];
        (0..self.grid.len())
            .map(|j| psi.values[j] * q.values[j] * self.grid.weights[j])
            .sum()
    }

    /// `Π̂q̂ = q̂ − Σ_k ⟨q̂_k, 1⟩ ψ̂⁽ᵏ⁾`.
    pub fn project_hat(&self, q: &BoundaryField) -> BoundaryField {
        let mut out = q.clone();
        for k in 0..self.curve_count() {
            let circ = q.integral(k);
            let psi = &self.basis.densities[k];
            for (o, p) in out.values.iter_mut().zip(&psi.values) {
                *o -= circ * p;
            }
        }
        out
    }

    /// `(Πq)_k = q_k − ⟨ψ̂⁽ᵏ⁾, q⟩`.
    pub fn project_trace(&self, q: &BoundaryField) -> BoundaryField {
        let shifts: Vec<C64> = (0..self.curve_count())
            .map(|k| self.equilibrium_pairing(k, q))
            .collect();
        let mut out = q.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v -= shifts[self.grid.curve_of[i]];
        }
        out
    }

    /// Projected trace of a function sampled at the nodes.
    pub fn trace0(&self, values: &BoundaryField) -> BoundaryField {
        self.project_trace(values)
    }

    /// Trace of `f` evaluated at the node positions, then projected.
    pub fn trace0_of(&self, f: impl Fn(C64) -> C64) -> BoundaryField {
        self.trace0(&BoundaryField::from_points(self.grid.clone(), f))
    }

    /// Largest `|⟨ψ̂⁽ᵏ⁾, q⟩|` relative to the scale of `q`.
    pub fn off_space(&self, q: &BoundaryField) -> f64 {
        let scale = q.max_abs().max(f64::MIN_POSITIVE);
        (0..self.curve_count())
            .map(|k| self.equilibrium_pairing(k, q).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Hermitian pairing `⟨p, q⟩_{1/2} = ∫ (𝖲⁻¹p) q̄ dσ`, conjugate-linear in `q`.
    pub fn inner_half(&self, p: &BoundaryField, q: &BoundaryField) -> Result<C64> {
        for (name, f) in [("first", p), ("second", q)] {
            let off = self.off_space(f);
            if off > OFF_SPACE_WARN {
                log::warn!("{name} argument of the half pairing is off the trace space ({off:.2e}); projecting");
            }
        }
        // per-curve constants do not change the result, so projection is implicit
        let d = self.density_of(p)?;
        Ok(self.pair_density(&d, q))
    }

    /// `∫ q̂ p̄ dσ` for a density and a trace.
    pub fn pair_density(&self, density: &BoundaryField, q: &BoundaryField) -> C64 {
        (0..self.grid.len())
            .map(|j| density.values[j] * q.values[j].conj() * self.grid.weights[j])
            .sum()
    }
}
