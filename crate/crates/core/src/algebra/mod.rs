//! Exact integer-polynomial arithmetic, certified roots, and the Pisot / Perron
//! / Pisot-family classifiers.

mod classify;
mod field;
mod newton;
mod poly;
mod roots;

use thiserror::Error;

pub use classify::{is_perron_root, is_pisot_family, is_pisot_number, SpectrumSelection, Verdict};
pub use field::{field_inverse, NumberField};
pub use newton::power_sums;
pub use poly::{IntPolynomial, RatPolynomial};
pub use roots::{isolate_roots, CertifiedRoot, RootSet};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("the zero polynomial is not allowed here")]
    ZeroPolynomial,
    #[error("polynomial is constant")]
    ConstantPolynomial,
    #[error("polynomial is not monic")]
    NonMonic,
    #[error("polynomial has a repeated root")]
    NotSquarefree,
    #[error("coefficients do not fit in double precision")]
    CoefficientOverflow,
    #[error("precision must be positive, got {0}")]
    InvalidPrecision(f64),
    #[error("certified radius {achieved:e} exceeds the requested precision")]
    PrecisionUnattainable { achieved: f64 },
    #[error("root discs could not be separated")]
    CertificationFailed,
    #[error("element is zero modulo the minimal polynomial")]
    NotInvertible,
    #[error("modulus is reducible: found a factor of degree {factor_degree}")]
    NotIrreducible { factor_degree: usize },
    #[error("no real root exceeds 1")]
    NoDominantRealRoot,
    #[error("a conjugate is too close to the unit circle to decide")]
    Undecidable,
    #[error("empty spectrum selection")]
    EmptySelection,
    #[error("selection is not closed under complex conjugation (root {index})")]
    NotConjugationClosed { index: usize },
    #[error("{re}{im:+}i is not a root of the polynomial")]
    NotARoot { re: f64, im: f64 },
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("value is not finite")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Distance from `x` to the nearest integer, in `[0, 0.5]`.
pub fn dist_to_integers(x: f64) -> Result<f64, AlgebraError> {
    if !x.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    Ok((x - x.round()).abs())
}
