//! Grid scans, exact decomposition of wave vectors, and the decay bound.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::family::Screen;
use super::pairing::{ExactForm, Member};
use super::profile::{DecayProfile, ProfileVerdict};
use super::SpectrumError;
use crate::algebra::{is_pisot_family, SpectrumSelection, Verdict};
use crate::expansion::{BlockVector, Expansion};

const MAX_GRID_POINTS: usize = 200_000;

/// The lattice `{lo + k·spacing}^d ∩ [lo, hi]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub fn points(&self, d: usize) -> Result<Vec<BlockVector>, SpectrumError> {
        if !(self.spacing > 0.0) || !(self.hi >= self.lo) {
            return Err(SpectrumError::InvalidArgument("grid needs spacing > 0 and hi ≥ lo".into()));
        }
        let per_axis = ((self.hi - self.lo) / self.spacing + 1e-9).floor() as usize + 1;
        let total = per_axis.checked_pow(d as u32).filter(|&t| t <= MAX_GRID_POINTS).ok_or_else(|| {
            SpectrumError::InvalidArgument(format!("grid of {per_axis}^{d} points is too large"))
        })?;
        let axis: Vec<f64> = (0..per_axis)
            .map(|k| {
                let v = self.lo + k as f64 * self.spacing;
                // Snap values that should be integers of the spacing lattice.
                let r = (v / self.spacing).round() * self.spacing;
                if (r - v).abs() < 1e-9 { r + 0.0 } else { v }
            })
            .collect();
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut v = BlockVector::zeros(d);
            for k in (0..d).rev() {
                v[k] = axis[rem % per_axis];
                rem /= per_axis;
            }
            out.push(v);
        }
        Ok(out)
    }
}

const FORM_MAX_DENOMINATOR: i64 = 64;
const FORM_COEFF_BOUND: i64 = 12;

#[derive(Debug, Clone)]
struct FactorBasis {
    offset: usize,
    /// Shifts `0..m` of every copy; a basis of the factor space.
    lead: Vec<Member>,
    lead_matrix: DMatrix<f64>,
    lead_inv: DMatrix<f64>,
    /// Shifts `m..deg` of every copy.
    free: Vec<Member>,
    free_matrix: DMatrix<f64>,
}

/// The vectors `(ρᵀ)⁻¹(φᵀ)^s β_j`, `0 ≤ s < deg`, of every factor, used to
/// rewrite wave vectors as rational combinations of family members (which the
/// exact pairing can evaluate).
#[derive(Debug, Clone)]
pub struct ExactBasis {
    factors: Vec<FactorBasis>,
}

impl ExactBasis {
    /// `rhos[f]` is the fitted `ρ` of factor `f`.
    pub fn new(expansion: &Expansion, rhos: &[DMatrix<f64>]) -> Result<Self, SpectrumError> {
        if rhos.len() != expansion.factors().len() {
            return Err(SpectrumError::InvalidArgument("one ρ per factor is required".into()));
        }
        let mut factors = Vec::with_capacity(rhos.len());
        for (f, (map, rho)) in expansion.factors().iter().zip(rhos).enumerate() {
            let rho_t_inv = rho
                .transpose()
                .try_inverse()
                .ok_or_else(|| SpectrumError::InvalidArgument("ρ is singular".into()))?;
            let deg = map.min_poly().degree();
            let (mut lead, mut lead_cols, mut free, mut free_cols) = (vec![], vec![], vec![], vec![]);
            for (j, beta) in map.beta_vectors().into_iter().enumerate() {
                let mut v = beta;
                for s in 0..deg {
                    let member = Member { factor: f, copy: j, shift: s };
                    let col = &rho_t_inv * &v;
                    if s < map.m() {
                        lead.push(member);
                        lead_cols.push(col);
                    } else {
                        free.push(member);
                        free_cols.push(col);
                    }
                    v = map.apply_transpose(&v)?;
                }
            }
            let lead_matrix = DMatrix::from_columns(&lead_cols);
            let lead_inv = lead_matrix
                .clone()
                .try_inverse()
                .ok_or_else(|| SpectrumError::InvalidArgument("family is not a basis".into()))?;
            let free_matrix = if free_cols.is_empty() {
                DMatrix::zeros(map.dim(), 0)
            } else {
                DMatrix::from_columns(&free_cols)
            };
            factors.push(FactorBasis { offset: expansion.offsets()[f], lead, lead_matrix, lead_inv, free, free_matrix });
        }
        Ok(ExactBasis { factors })
    }

    /// `γ` as `Σ (num/den)·member`, found by a bounded search over
    /// denominators and the coefficients of the higher shifts.
    pub fn form_for(&self, gamma: &BlockVector) -> Option<ExactForm> {
        let mut parts: Vec<(i64, Vec<(Member, i64)>)> = Vec::with_capacity(self.factors.len());
        for fb in &self.factors {
            let d = fb.lead.len();
            let local = gamma.rows(fb.offset, d).into_owned();
            parts.push(fb.search(&local)?);
        }
        let den = parts.iter().fold(1i64, |acc, (q, _)| num_integer::lcm(acc, *q));
        let mut terms = Vec::new();
        for (q, t) in parts {
            let scale = den / q;
            terms.extend(t.into_iter().filter(|&(_, n)| n != 0).map(|(m, n)| (m, (n * scale) as i128)));
        }
        Some(ExactForm { den: den as i128, terms })
    }
}

impl FactorBasis {
    fn search(&self, local: &BlockVector) -> Option<(i64, Vec<(Member, i64)>)> {
        if local.iter().all(|&x| x == 0.0) {
            return Some((1, vec![]));
        }
        let nfree = self.free.len();
        for q in 1..=FORM_MAX_DENOMINATOR {
            let target = local * q as f64;
            let scale = 1.0 + target.amax();
            let mut hit = None;
            for_each_box(nfree, FORM_COEFF_BOUND, |free| {
                let fv = BlockVector::from_fn(nfree, |r, _| free[r] as f64);
                let lead = (&self.lead_inv * (&target - &self.free_matrix * &fv)).map(f64::round);
                let back = &self.lead_matrix * &lead + &self.free_matrix * &fv;
                if (back - &target).amax() <= 1e-8 * scale {
                    hit = Some((lead, free.to_vec()));
                    true
                } else {
                    false
                }
            });
            if let Some((lead, free)) = hit {
                let mut terms: Vec<(Member, i64)> =
                    self.lead.iter().zip(lead.iter()).map(|(m, &c)| (*m, c as i64)).collect();
                terms.extend(self.free.iter().zip(free).map(|(m, c)| (*m, c)));
                let g = terms.iter().fold(q, |acc, &(_, n)| num_integer::gcd(acc, n));
                return Some((q / g, terms.into_iter().map(|(m, n)| (m, n / g)).collect()));
            }
        }
        None
    }
}

/// Visits `[-bound, bound]^dim` in order of increasing max-norm until `visit` returns `true`.
fn for_each_box(dim: usize, bound: i64, mut visit: impl FnMut(&[i64]) -> bool) {
    if dim == 0 {
        visit(&[]);
        return;
    }
    let mut v = vec![0i64; dim];
    for r in 0..=bound {
        v.iter_mut().for_each(|x| *x = -r);
        loop {
            if v.iter().any(|x| x.abs() == r) && visit(&v) {
                return;
            }
            let Some(i) = (0..dim).find(|&i| v[i] < r) else { break };
            v[i] += 1;
            v[..i].iter_mut().for_each(|x| *x = -r);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub gamma: Vec<f64>,
    pub profile: DecayProfile,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub entries: Vec<ProbeEntry>,
    /// Candidates other than `γ = 0` whose profile decays.
    pub decaying_nonzero: usize,
    pub consistent_with_weak_mixing: bool,
}

/// Profiles every candidate (in parallel, results in input order).
pub fn profile_all(
    screen: &Screen,
    basis: Option<&ExactBasis>,
    candidates: &[BlockVector],
) -> Result<Vec<DecayProfile>, SpectrumError> {
    candidates
        .par_iter()
        .map(|g| {
            let form = basis.and_then(|b| b.form_for(g));
            screen.profile(g, form.as_ref())
        })
        .collect()
}

/// Runs profiles on grid points and extra candidates and counts nonzero decays.
/// Evidence only: a finite sample never proves weak mixing.
pub fn weak_mixing_probe(
    screen: &Screen,
    basis: Option<&ExactBasis>,
    grid: Option<&GridSpec>,
    extra: &[BlockVector],
) -> Result<ProbeReport, SpectrumError> {
    let d = screen.expansion.dim();
    let mut candidates = match grid {
        Some(g) => g.points(d)?,
        None => Vec::new(),
    };
    candidates.extend(extra.iter().cloned());
    let profiles = if candidates.is_empty() { Vec::new() } else { profile_all(screen, basis, &candidates)? };
    let entries: Vec<ProbeEntry> = candidates
        .iter()
        .zip(profiles)
        .map(|(g, p)| ProbeEntry { gamma: g.iter().copied().collect(), profile: p })
        .collect();
    let decaying_nonzero = entries
        .iter()
        .filter(|e| e.profile.verdict == ProfileVerdict::Decays && e.gamma.iter().any(|&x| x != 0.0))
        .count();
    Ok(ProbeReport { entries, decaying_nonzero, consistent_with_weak_mixing: decaying_nonzero == 0 })
}

/// `Σ_{γ ∉ Λ} |γ|ⁿ`, the bound on `dist(⟨φⁿx, γ⟩, ℤ)` per unit module coefficient.
pub fn pisot_decay_bound(sel: &SpectrumSelection, n: usize) -> Result<f64, SpectrumError> {
    if is_pisot_family(sel, 1e-12) != Verdict::Yes {
        return Err(SpectrumError::NotPisotFamily);
    }
    Ok(sel.excluded().map(|i| sel.roots().roots[i].value.norm().powi(n as i32)).sum())
}
