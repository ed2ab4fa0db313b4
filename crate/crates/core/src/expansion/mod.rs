//! The expansion map `φ` in real canonical block form, its norm and projections,
//! the `ℱ` transform, the `α`/`β` vectors, and exact module coordinates.

mod map;
mod module;
mod tau;
mod vectors;

use thiserror::Error;

use crate::algebra::AlgebraError;

pub use map::{BlockVector, Expansion, ExpansionMap, ExpansionSpec, BLOCK_MATCH_TOL};
pub use module::{coords_to_integers, is_integral, ModuleCoords, RecoverySearch};
pub use tau::{FieldMatrix, TauFit, DEFAULT_ANGULAR_TOL, DEFAULT_F_TOL};
pub use vectors::{complex_inner, FImage, VandermondeFamily};

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid expansion map: {0}")]
    InvalidMap(String),
    #[error("{re}{im:+}i is not a root of the minimal polynomial")]
    NotARoot { re: f64, im: f64 },
    #[error("expansion map has an eigenvalue of modulus at most 1")]
    NotExpanding,
    #[error("index {index} out of range for {len} blocks")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("vector is not supported on a single block H_j")]
    NotInSingleBlock,
    #[error("F-image coordinate {index} vanishes")]
    ZeroCoordinate { index: usize },
    #[error("basis is degenerate (normalized determinant {determinant:e})")]
    DegenerateBasis { determinant: f64 },
    #[error("no bounded module relation found (residual {residual:e})")]
    NoModuleRelation { residual: f64 },
    #[error("no basis point near alpha_{index}")]
    NoBasisPoint { index: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
