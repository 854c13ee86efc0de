//! Nodal boundary functions and dense operators between boundary grids.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::geometry::BoundaryGrid;

/// Complex value per node of a [`BoundaryGrid`].
#[derive(Clone, Debug)]
pub struct BoundaryField {
    pub grid: Arc<BoundaryGrid>,
    pub values: Vec<C64>,
}

impl BoundaryField {
    pub fn new(grid: Arc<BoundaryGrid>, values: Vec<C64>) -> Self {
        assert_eq!(grid.len(), values.len(), "field length must match the grid");
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<BoundaryGrid>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![C64::new(0.0, 0.0); n])
    }

    pub fn constant(grid: Arc<BoundaryGrid>, value: C64) -> Self {
        let n = grid.len();
        Self::new(grid, vec![value; n])
    }

    /// Samples `f(position)` at every node.
    pub fn from_points(grid: Arc<BoundaryGrid>, f: impl Fn(C64) -> C64) -> Self {
        let values = grid.points.iter().map(|&z| f(z)).collect();
        Self::new(grid, values)
    }

    /// Samples `f(curve, node, parameter)` at every node.
    pub fn from_params(grid: Arc<BoundaryGrid>, f: impl Fn(usize, f64) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|i| f(grid.curve_of[i], grid.params[i]))
            .collect();
        Self::new(grid, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values on curve `k` only.
    pub fn on_curve(&self, k: usize) -> &[C64] {
        &self.values[self.grid.curve_range(k)]
    }

    /// Weighted integral `∫_{γ_k} q dσ`.
    pub fn integral(&self, k: usize) -> C64 {
        self.grid
            .curve_range(k)
            .map(|i| self.values[i] * self.grid.weights[i])
            .sum()
    }

    pub fn conj(&self) -> Self {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|v| v.conj()).collect(),
        )
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|v| v * s).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.values)
    }
}

/// Dense real matrix mapping nodal values on `source` to nodal values on `target`.
///
/// Quadrature weights are folded into the entries. Complex fields are applied
/// componentwise, since every kernel here is real.
#[derive(Clone, Debug)]
pub struct BoundaryOperator {
    pub source: Arc<BoundaryGrid>,
    pub target: Arc<BoundaryGrid>,
    pub matrix: DMatrix<f64>,
}

impl BoundaryOperator {
    pub fn new(source: Arc<BoundaryGrid>, target: Arc<BoundaryGrid>, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), target.len());
        assert_eq!(matrix.ncols(), source.len());
        Self {
            source,
            target,
            matrix,
        }
    }

    pub fn apply(&self, f: &BoundaryField) -> BoundaryField {
        assert_eq!(f.len(), self.source.len());
        BoundaryField::new(self.target.clone(), apply_real(&self.matrix, &f.values))
    }
}

/// `A v` for real `A` and complex `v`.
pub fn apply_real(a: &DMatrix<f64>, v: &[C64]) -> Vec<C64> {
    let (re, im) = split(v);
    let re = a * re;
    let im = a * im;
    re.iter()
        .zip(im.iter())
        .map(|(&r, &i)| C64::new(r, i))
        .collect()
}

pub fn split(v: &[C64]) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_iterator(v.len(), v.iter().map(|z| z.re)),
        DVector::from_iterator(v.len(), v.iter().map(|z| z.im)),
    )
}

pub fn join(re: &DVector<f64>, im: &DVector<f64>) -> Vec<C64> {
    re.iter()
        .zip(im.iter())
        .map(|(&r, &i)| C64::new(r, i))
        .collect()
}
