//! `ρ = (1/b)·τ⁻¹` with `b` the common denominator of `τ(ξ)` over a sample.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::SpectrumError;
use crate::expansion::{BlockVector, ExpansionMap, ModuleCoords, RecoverySearch, TauFit};

pub const DEFAULT_DENOMINATOR_BOUND: u32 = 64;

const DUAL_ROUTE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RhoFit {
    pub b: BigInt,
    /// `(1/b)·τ⁻¹`.
    pub rho: DMatrix<f64>,
    /// `ρ⁻¹ = b·τ`.
    pub rho_inverse: DMatrix<f64>,
    /// Integer coefficients of `ρ⁻¹ξ` for each sample: `[sample][copy][r]`.
    pub coords: Vec<Vec<Vec<BigInt>>>,
    /// Largest gap between the real and module routes for `b·τ(ξ)`.
    pub worst_residual: f64,
}

/// Recovers `b` from `τ(ξ)` over the sample. With `exact` module coordinates of
/// the samples and an exact `τ`, the denominators are read off directly;
/// otherwise each `τ(ξ)` goes through the bounded module search.
pub fn fit_rho(
    map: &ExpansionMap,
    tau: &TauFit,
    samples: &[BlockVector],
    exact: Option<&[ModuleCoords]>,
    denominator_bound: u32,
) -> Result<RhoFit, SpectrumError> {
    if samples.is_empty() {
        return Err(SpectrumError::InvalidArgument("no samples for the denominator fit".into()));
    }
    let images: Vec<ModuleCoords> = match (exact, &tau.exact) {
        (Some(ex), Some(t)) => ex.iter().map(|u| t.apply(map.field(), u)).collect(),
        _ => {
            let search = RecoverySearch { max_denominator: denominator_bound, ..RecoverySearch::default() };
            let mut out = Vec::with_capacity(samples.len());
            for xi in samples {
                match map.recover_module(&tau.apply(xi), &search) {
                    Ok(c) => out.push(c),
                    Err(crate::expansion::ExpansionError::NoModuleRelation { residual }) => {
                        return Err(SpectrumError::ReconstructionFailed { worst_residual: residual });
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            out
        }
    };
    let mut b = BigInt::one();
    for c in &images {
        b = b.lcm(&c.denominator_lcm());
    }
    if b > BigInt::from(denominator_bound) {
        return Err(SpectrumError::ReconstructionFailed { worst_residual: b.to_f64().unwrap_or(f64::INFINITY) });
    }
    let scale = BigRational::from_integer(b.clone());
    let b_f = b.to_f64().expect("bounded denominator");
    let rho_inverse = &tau.matrix * b_f;
    let rho = tau
        .matrix
        .clone()
        .try_inverse()
        .ok_or(SpectrumError::InvalidArgument("τ is singular".into()))?
        / b_f;
    let n = map.min_poly().degree();
    let mut coords = Vec::with_capacity(images.len());
    let mut worst: f64 = 0.0;
    for (xi, img) in samples.iter().zip(&images) {
        let scaled = img.scale(&scale);
        let real = &rho_inverse * xi;
        let gap = (map.embed(&scaled) - &real).amax() / (1.0 + real.amax());
        worst = worst.max(gap);
        if gap > DUAL_ROUTE_TOL {
            return Err(SpectrumError::ReconstructionFailed { worst_residual: gap });
        }
        let per_copy = scaled
            .parts()
            .iter()
            .map(|p| {
                let mut v = p.to_integer().expect("scaled by the common denominator");
                v.resize(n, BigInt::from(0));
                v
            })
            .collect();
        coords.push(per_copy);
    }
    Ok(RhoFit { b, rho, rho_inverse, coords, worst_residual: worst })
}
