//! Reconstruction of perfectly conducting cavities from Dirichlet-to-Neumann
//! data via harmonic moments and a Prony-type shape-from-moments solve.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dtn;
pub mod eigen;
pub mod error;
pub mod field;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod moments;
pub mod oracles;
pub mod pipeline;
pub mod prony;
pub mod trace;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
