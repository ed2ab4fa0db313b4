//! The explicit family `(ρᵀ)⁻¹(φᵀ)^{K+l}β_j` and the search for `K`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::pairing::{ExactForm, Member, PairingEngine};
use super::profile::{criterion_profile, criterion_profile_exact, DecayProfile, ProfileConfig, ProfileVerdict};
use super::SpectrumError;
use crate::expansion::{BlockVector, Expansion, ExpansionMap};

/// Factor-local vectors `(ρᵀ)⁻¹(φᵀ)^{K+l}β_j`, ordered by `j` then `l`.
pub fn family_vectors(map: &ExpansionMap, rho: &DMatrix<f64>, k: usize) -> Result<Vec<(usize, usize, BlockVector)>, SpectrumError> {
    let rho_t_inv = rho
        .transpose()
        .try_inverse()
        .ok_or_else(|| SpectrumError::InvalidArgument("ρ is singular".into()))?;
    let mut out = Vec::with_capacity(map.dim());
    for (j, beta) in map.beta_vectors().into_iter().enumerate() {
        let mut v = beta;
        for _ in 0..k {
            v = map.apply_transpose(&v)?;
        }
        for l in 0..map.m() {
            out.push((j, l, &rho_t_inv * &v));
            v = map.apply_transpose(&v)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyCandidate {
    pub member: Member,
    pub l: usize,
    pub k: usize,
    /// Wave vector in `ℝ^d`.
    pub gamma: Vec<f64>,
    pub profile: DecayProfile,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructedFamily {
    pub factor: usize,
    pub k: usize,
    pub passed: bool,
    pub members: Vec<FamilyCandidate>,
    /// Determinant of the factor-local family.
    pub determinant: f64,
}

/// Return-vector sample and screening settings shared by all profiles of a run.
#[derive(Debug, Clone)]
pub struct Screen {
    pub expansion: Expansion,
    pub xi: Vec<BlockVector>,
    pub periods: Vec<BlockVector>,
    pub engine: Option<PairingEngine>,
    pub cfg: ProfileConfig,
}

impl Screen {
    /// Exact route when a form is given and the engine exists, double precision otherwise.
    pub fn profile(&self, gamma: &BlockVector, form: Option<&ExactForm>) -> Result<DecayProfile, SpectrumError> {
        match (form, &self.engine) {
            (Some(f), Some(engine)) => criterion_profile_exact(engine, f, &self.periods, gamma, &self.cfg),
            _ => criterion_profile(&self.expansion, &self.xi, &self.periods, gamma, &self.cfg),
        }
    }
}

/// Screens the family of factor `factor` for `K = 0, 1, …, k_max` and returns
/// the first `K` at which every member decays (with `passed = false` and the
/// `K = 0` family when none does).
pub fn screen_family(
    screen: &Screen,
    factor: usize,
    rho: &DMatrix<f64>,
    k_max: usize,
) -> Result<ConstructedFamily, SpectrumError> {
    let map = &screen.expansion.factors()[factor];
    let mut first = None;
    for k in 0..=k_max {
        let vecs = family_vectors(map, rho, k)?;
        let local = DMatrix::from_columns(&vecs.iter().map(|v| v.2.clone()).collect::<Vec<_>>());
        let determinant = local.determinant();
        let members = vecs
            .par_iter()
            .map(|(j, l, v)| {
                let gamma = screen.expansion.embed_factor(v, factor);
                let member = Member { factor, copy: *j, shift: k + l };
                let profile = screen.profile(&gamma, Some(&ExactForm::single(member)))?;
                Ok(FamilyCandidate { member, l: *l, k, gamma: gamma.iter().copied().collect(), profile })
            })
            .collect::<Result<Vec<_>, SpectrumError>>()?;
        let passed = members.iter().all(|m| m.profile.verdict == ProfileVerdict::Decays && m.profile.period_ok);
        let family = ConstructedFamily { factor, k, passed, members, determinant };
        if passed {
            return Ok(family);
        }
        first.get_or_insert(family);
    }
    Ok(first.expect("k_max ≥ 0 gives one family"))
}

/// As [`screen_family`], failing with `NoPassingK` when no `K ≤ k_max` passes.
pub fn construct_family(
    screen: &Screen,
    factor: usize,
    rho: &DMatrix<f64>,
    k_max: usize,
) -> Result<ConstructedFamily, SpectrumError> {
    let fam = screen_family(screen, factor, rho, k_max)?;
    if fam.passed {
        Ok(fam)
    } else {
        Err(SpectrumError::NoPassingK { k_max })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::IntPolynomial;
    use nalgebra::{dvector, DVector};

    const PHI: f64 = 1.618033988749895;

    fn golden() -> ExpansionMap {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        ExpansionMap::new(p, vec![PHI], vec![], 1).unwrap()
    }

    #[test]
    fn scaling_by_rho() {
        let e = golden();
        let v = family_vectors(&e, &(DMatrix::identity(1, 1) * 2.0), 3).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0].2[0] - 0.5 * PHI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn identity_rho_gives_powers_of_beta() {
        let p = IntPolynomial::from_i64(&[-3, -1, 0, 1]).unwrap();
        let roots = crate::algebra::isolate_roots(&p, 1e-12).unwrap();
        let real = roots.roots.iter().find(|r| r.is_real()).unwrap().value.re;
        let c = roots.roots.iter().find(|r| r.value.im > 0.0).unwrap().value;
        let e = ExpansionMap::new(p, vec![real], vec![(c.re, c.im)], 1).unwrap();
        let k = 2;
        let fam = family_vectors(&e, &DMatrix::identity(3, 3), k).unwrap();
        let phi_t = e.matrix().transpose();
        let beta = &e.beta_vectors()[0];
        for (_, l, v) in &fam {
            let want: DVector<f64> = phi_t.pow((k + l) as u32) * beta;
            assert!((v - want).amax() < 1e-12);
        }
    }

    #[test]
    fn golden_family_passes_at_zero() {
        let e = golden();
        let xi: Vec<BlockVector> = (-5..=5).flat_map(|a| (-5..=5).map(move |b| dvector![a as f64 + b as f64 * PHI])).collect();
        let screen = Screen {
            expansion: Expansion::single(e),
            xi,
            periods: vec![dvector![0.0]],
            engine: None,
            cfg: ProfileConfig { n_max: 30, ..ProfileConfig::default() },
        };
        let fam = construct_family(&screen, 0, &DMatrix::identity(1, 1), 3).unwrap();
        assert_eq!(fam.k, 0);
        assert!((fam.members[0].gamma[0] - 1.0).abs() < 1e-12);
    }
}
