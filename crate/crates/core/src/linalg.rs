//! Small helpers around nalgebra's dense factorizations.

use nalgebra::{DMatrix, Dyn, LU};

use crate::error::{Error, Result};

/// Pivot ratio below which a factorized system is declared singular.
pub const PIVOT_RATIO_FLOOR: f64 = 1e-13;

/// LU factorization together with the matrix, for one refinement step.
pub struct Factorized {
    pub matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl Factorized {
    /// Factorizes `a`, failing when the smallest pivot is negligible.
    pub fn new(a: DMatrix<f64>, what: &str) -> Result<Self> {
        let lu = a.clone().lu();
        let diag = lu.u().diagonal().map(f64::abs);
        let (lo, hi) = (diag.min(), diag.max());
        if !(lo > PIVOT_RATIO_FLOOR * hi) {
            return Err(Error::SingularSystem(format!(
                "{what}: pivot ratio {:.2e}",
                lo / hi
            )));
        }
        Ok(Self { matrix: a, lu })
    }

    /// Solves `A X = B` with one step of iterative refinement.
    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let fail = || Error::SingularSystem("triangular solve failed".into());
        let mut x = self.lu.solve(b).ok_or_else(fail)?;
        let r = b - &self.matrix * &x;
        x += self.lu.solve(&r).ok_or_else(fail)?;
        Ok(x)
    }

    pub fn solve_vec(&self, b: &nalgebra::DVector<f64>) -> Result<nalgebra::DVector<f64>> {
        let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
        Ok(self.solve(&m)?.column(0).into_owned())
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.solve(&DMatrix::identity(self.matrix.nrows(), self.matrix.ncols()))
    }
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}
