//! Forward cavity problem and the Dirichlet-to-Neumann operators on `Γ`.
//!
//! The potential is a single layer on every curve plus an unknown constant
//! per cavity:
//!
//! ```text
//! [ 𝖲_ΓΓ  𝖲_Γγ   0 ] [q̂_Γ]   [f]
//! [ 𝖲_γΓ  𝖲_γγ  −E ] [q̂_γ] = [0]
//! [  0     J     0 ] [ c ]   [0]
//! ```
//!
//! where `J` takes the circulation on each cavity. The outward flux on `Γ`
//! is `(½ − 𝖫*_ΓΓ)q̂_Γ − 𝖫*_Γγ q̂_γ`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::field::{apply_real, join, split, BoundaryField, BoundaryOperator};
use crate::geometry::{sample_grid, BoundaryGrid, Scene};
use crate::kernels::{assemble_adjoint_double_layer, assemble_single_layer};
use crate::linalg::{spectral_norm, Factorized};
use crate::trace::TraceSpace;

/// Multiplicative Gaussian perturbation `R_ij ↦ R_ij(1 + level·ξ_ij)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Noise {
    pub level: f64,
    pub seed: u64,
}

/// Solution of the forward problem for one Dirichlet datum.
#[derive(Clone, Debug)]
pub struct CavitySolution {
    /// Single-layer densities on all curves, outer boundary first.
    pub densities: BoundaryField,
    /// Potential value on each cavity.
    pub constants: Vec<C64>,
    /// Outward normal derivative on `Γ`.
    pub flux: BoundaryField,
}

/// Factorized forward problem on a sampled scene.
pub struct CavityProblem {
    pub grid: Arc<BoundaryGrid>,
    pub outer: Arc<BoundaryGrid>,
    pub single: BoundaryOperator,
    system: Factorized,
    /// `𝖫*` rows on `Γ` against every curve.
    lstar_outer: DMatrix<f64>,
}

impl CavityProblem {
    pub fn new(scene: &Scene, nodes_per_curve: usize) -> Result<Self> {
        Self::from_grid(Arc::new(sample_grid(scene, nodes_per_curve)?))
    }

    /// `grid` holds `Γ` as curve 0 followed by the cavities.
    pub fn from_grid(grid: Arc<BoundaryGrid>) -> Result<Self> {
        let outer = Arc::new(grid.subgrid(0..1));
        let single = assemble_single_layer(&grid, &grid);
        let lstar_outer = assemble_adjoint_double_layer(&grid, &outer).matrix;
        let n = grid.len();
        let m = outer.len();
        let nc = grid.curve_count() - 1;
        let mut a = DMatrix::<f64>::zeros(n + nc, n + nc);
        a.view_mut((0, 0), (n, n)).copy_from(&single.matrix);
        for i in m..n {
            let k = grid.curve_of[i] - 1;
            a[(i, n + k)] = -1.0;
            a[(n + k, i)] = grid.weights[i];
        }
        let system = Factorized::new(a, "cavity problem")?;
        Ok(Self {
            grid,
            outer,
            single,
            system,
            lstar_outer,
        })
    }

    pub fn cavity_count(&self) -> usize {
        self.grid.curve_count() - 1
    }

    fn rhs(&self, cols: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.grid.len() + self.cavity_count(), cols)
    }

    /// Outward flux on `Γ` from stacked densities (one per column).
    fn flux_matrix(&self, densities: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.outer.len();
        densities.rows(0, m) * 0.5 - &self.lstar_outer * densities
    }

    pub fn solve(&self, f: &BoundaryField) -> Result<CavitySolution> {
        let m = self.outer.len();
        let n = self.grid.len();
        assert_eq!(f.len(), m);
        let (re, im) = split(&f.values);
        let mut b = self.rhs(2);
        b.view_mut((0, 0), (m, 1)).copy_from(&re);
        b.view_mut((0, 1), (m, 1)).copy_from(&im);
        let x = self.system.solve(&b)?;
        let dens = x.rows(0, n).into_owned();
        let flux = self.flux_matrix(&dens);
        let residual = (&self.system.matrix * &x - &b).amax() / b.amax().max(f64::MIN_POSITIVE);
        if residual > 1e-9 {
            log::warn!("cavity problem residual {residual:.2e}");
        }
        let col = |a: &DMatrix<f64>, rows: std::ops::Range<usize>| {
            join(
                &a.view((rows.start, 0), (rows.len(), 1))
                    .into_owned()
                    .column(0)
                    .into_owned(),
                &a.view((rows.start, 1), (rows.len(), 1))
                    .into_owned()
                    .column(0)
                    .into_owned(),
            )
        };
        Ok(CavitySolution {
            densities: BoundaryField::new(self.grid.clone(), col(&x, 0..n)),
            constants: col(&x, n..n + self.cavity_count()),
            flux: BoundaryField::new(self.outer.clone(), col(&flux, 0..m)),
        })
    }

    /// `Λ_γ` in the nodal basis.
    pub fn dtn_matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.outer.len();
        let n = self.grid.len();
        let mut b = self.rhs(m);
        b.view_mut((0, 0), (m, m)).fill_with_identity();
        let x = self.system.solve(&b)?;
        Ok(self.flux_matrix(&x.rows(0, n).into_owned()))
    }
}

/// The cavity-to-boundary interaction operators.
#[derive(Clone, Debug)]
pub struct Interaction {
    /// `𝖪_Γ^γ : q ↦ Tr⁰_γ(𝒮_Γ q̂)`.
    pub to_cavities: BoundaryOperator,
    /// `𝖪_γ^Γ : p ↦ Tr⁰_Γ(𝒮_γ p̂)`.
    pub to_outer: BoundaryOperator,
    /// `𝖪 = 𝖪_γ^Γ 𝖪_Γ^γ`.
    pub direct: BoundaryOperator,
}

/// `Λ_γ`, `Λ_0` and `𝖱 = 𝖲_Γ(Λ_γ − Λ_0)` on the outer grid.
#[derive(Clone, Debug)]
pub struct DtnPair {
    pub lambda_gamma: BoundaryOperator,
    pub lambda_0: BoundaryOperator,
    pub r: BoundaryOperator,
    /// `𝖲_ΓΓ`, needed to pair with `Γ` traces.
    pub single_outer: BoundaryOperator,
    pub interaction: Option<Interaction>,
    pub noise: Option<Noise>,
}

impl DtnPair {
    pub fn outer(&self) -> &Arc<BoundaryGrid> {
        &self.r.source
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DtnOptions {
    pub with_interaction: bool,
    pub noise: Option<Noise>,
}

/// Samples the scene and assembles the DtN pair.
pub fn assemble_dtn(scene: &Scene, nodes_per_curve: usize, opts: DtnOptions) -> Result<DtnPair> {
    let problem = CavityProblem::new(scene, nodes_per_curve)?;
    assemble_dtn_from(&problem, opts)
}

pub fn assemble_dtn_from(problem: &CavityProblem, opts: DtnOptions) -> Result<DtnPair> {
    let outer = problem.outer.clone();
    let m = outer.len();
    let s_outer = problem.single.matrix.view((0, 0), (m, m)).into_owned();
    let s_fact = Factorized::new(s_outer.clone(), "outer single layer")?;
    let s_inv = s_fact.inverse()?;
    let lstar = problem.lstar_outer.columns(0, m).into_owned();
    let half_minus = DMatrix::<f64>::identity(m, m) * 0.5 - lstar;
    let lambda_0 = &half_minus * &s_inv;
    let lambda_gamma = if problem.cavity_count() == 0 {
        lambda_0.clone()
    } else {
        problem.dtn_matrix()?
    };
    let mut r = &s_outer * (&lambda_gamma - &lambda_0);
    if let Some(noise) = opts.noise.filter(|n| n.level > 0.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        // column-major fill keeps the draw order fixed
        for v in r.iter_mut() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            *v *= 1.0 + noise.level * xi;
        }
    }
    let interaction = if opts.with_interaction && problem.cavity_count() > 0 {
        Some(assemble_interaction(problem, &s_inv)?)
    } else {
        None
    };
    let op = |a| BoundaryOperator::new(outer.clone(), outer.clone(), a);
    Ok(DtnPair {
        lambda_gamma: op(lambda_gamma),
        lambda_0: op(lambda_0),
        r: op(r),
        single_outer: op(s_outer),
        interaction,
        noise: opts.noise,
    })
}

fn projector(space: &TraceSpace) -> DMatrix<f64> {
    let n = space.grid.len();
    let mut p = DMatrix::<f64>::identity(n, n);
    for (k, psi) in space.basis.densities.iter().enumerate() {
        for i in space.grid.curve_range(k) {
            for j in 0..n {
                p[(i, j)] -= psi.values[j].re * space.grid.weights[j];
            }
        }
    }
    p
}

fn assemble_interaction(
    problem: &CavityProblem,
    s_outer_inv: &DMatrix<f64>,
) -> Result<Interaction> {
    let g = &problem.grid;
    let m = problem.outer.len();
    let n = g.len();
    let cavities = Arc::new(g.subgrid(1..g.curve_count()));
    let s = &problem.single.matrix;
    let s_cc = s.view((m, m), (n - m, n - m)).into_owned();
    let cav_space = TraceSpace::with_single_layer(BoundaryOperator::new(
        cavities.clone(),
        cavities.clone(),
        s_cc.clone(),
    ))?;
    let outer_space = TraceSpace::new(problem.outer.clone())?;
    let p_cav = projector(&cav_space);
    let p_out = projector(&outer_space);
    let s_cc_inv = Factorized::new(s_cc, "cavity single layer")?.inverse()?;
    let to_cavities = &p_cav * s.view((m, 0), (n - m, m)) * s_outer_inv * &p_out;
    let to_outer = &p_out * s.view((0, m), (m, n - m)) * &s_cc_inv * &p_cav;
    let direct = &to_outer * &to_cavities;
    let outer = problem.outer.clone();
    Ok(Interaction {
        to_cavities: BoundaryOperator::new(outer.clone(), cavities.clone(), to_cavities),
        to_outer: BoundaryOperator::new(cavities, outer.clone(), to_outer),
        direct: BoundaryOperator::new(outer.clone(), outer, direct),
    })
}

/// `(Id + 𝖱)⁻¹𝖱`, the data-side form of `𝖪`.
pub fn measured_interaction(dtn: &DtnPair) -> Result<DMatrix<f64>> {
    let m = dtn.r.matrix.nrows();
    let a = DMatrix::<f64>::identity(m, m) + &dtn.r.matrix;
    Factorized::new(a, "Id + R")?.solve(&dtn.r.matrix)
}

/// Norm of `op` on the trace space, measured in the half pairing of `space`.
///
/// `op` must map the space to itself and annihilate per-curve constants.
pub fn trace_norm(space: &TraceSpace, op: &DMatrix<f64>) -> Result<f64> {
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&space.grid.weights));
    let gram = w * space.density_matrix()?;
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-12 * top)
        .collect();
    let v = eig.eigenvectors.select_columns(&keep);
    let sq: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i].sqrt()).collect();
    let mut t = v.transpose() * op * &v;
    for (r, a) in sq.iter().enumerate() {
        for (c, b) in sq.iter().enumerate() {
            t[(r, c)] *= a / b;
        }
    }
    Ok(spectral_norm(&t))
}

/// Largest relative mismatch of `⟨𝖪_Γ^γ q, p⟩_γ` against `⟨q, 𝖪_γ^Γ p⟩_Γ`.
pub fn adjoint_check(
    interaction: &Interaction,
    outer: &TraceSpace,
    cavities: &TraceSpace,
    samples: &[(BoundaryField, BoundaryField)],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (q, p) in samples {
        let q = outer.project_trace(q);
        let p = cavities.project_trace(p);
        let kq = interaction.to_cavities.apply(&q);
        let kp = interaction.to_outer.apply(&p);
        let lhs = cavities.inner_half(&kq, &p)?;
        let rhs = outer.inner_half(&q, &kp)?;
        let scale = lhs.norm().max(rhs.norm());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

/// `A v` for a nodal operator matrix.
pub fn apply(a: &DMatrix<f64>, f: &BoundaryField) -> Vec<C64> {
    apply_real(a, &f.values)
}
