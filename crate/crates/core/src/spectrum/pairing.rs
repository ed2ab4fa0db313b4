//! Exact evaluation of `⟨φⁿx, γ⟩ mod ℤ` for wave vectors built from the family
//! `(ρᵀ)⁻¹(φᵀ)^s β_j`.
//!
//! With `c(x)` the integer coordinates of `ρ⁻¹x = bτ(x)` in the basis
//! `{φ^r α_j}`, `⟨φⁿx, (ρᵀ)⁻¹(φᵀ)^s β_j⟩ = Σ_r c_{j,r} S_{n+s+r}` where
//! `S_M = Σ_{λ ∈ blocks} λ^M = p_M − R_M`, `p_M` the full power sum (an integer)
//! and `R_M` the sum over the excluded conjugates. The integer part is reduced
//! exactly; only `Σ c_r R_M` is evaluated in double precision.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::profile::OVERFLOW_GUARD;
use super::SpectrumError;
use crate::algebra::{dist_to_integers, power_sums};
use crate::expansion::{Expansion, ExpansionMap};

/// One family vector `(ρ_fᵀ)⁻¹(φ_fᵀ)^shift β_copy` of factor `factor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Member {
    pub factor: usize,
    pub copy: usize,
    pub shift: usize,
}

/// `γ = Σ (num/den) · member`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactForm {
    pub den: i128,
    pub terms: Vec<(Member, i128)>,
}

impl ExactForm {
    pub fn single(member: Member) -> Self {
        ExactForm { den: 1, terms: vec![(member, 1)] }
    }

    /// The form of the sum of two wave vectors, over the least common denominator.
    pub fn add(&self, other: &ExactForm) -> ExactForm {
        let den = self.den.lcm(&other.den);
        let mut acc: std::collections::BTreeMap<Member, i128> = std::collections::BTreeMap::new();
        for (f, scale) in [(self, den / self.den), (other, den / other.den)] {
            for &(m, n) in &f.terms {
                *acc.entry(m).or_insert(0) += n * scale;
            }
        }
        ExactForm { den, terms: acc.into_iter().filter(|&(_, n)| n != 0).collect() }
    }

    pub fn max_shift(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.shift).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
struct FactorData {
    deg: usize,
    power_sums: Vec<BigInt>,
    residuals: Vec<f64>,
}

impl FactorData {
    fn new(map: &ExpansionMap, max_index: usize) -> Result<Self, SpectrumError> {
        let poly = map.min_poly();
        let deg = poly.degree();
        let mut ps = vec![BigInt::from(deg)];
        ps.extend(power_sums(poly, max_index.max(1))?);
        let excluded: Vec<Complex64> =
            map.selection().excluded().map(|i| map.roots().roots[i].value).collect();
        let mut residuals = Vec::with_capacity(max_index + 1);
        let mut pows = vec![Complex64::new(1.0, 0.0); excluded.len()];
        for _ in 0..=max_index {
            residuals.push(pows.iter().map(|z| z.re).sum());
            for (p, z) in pows.iter_mut().zip(&excluded) {
                *p *= z;
            }
        }
        Ok(FactorData { deg, power_sums: ps, residuals })
    }
}

#[derive(Debug, Clone)]
pub struct PairingEngine {
    factors: Vec<FactorData>,
    /// `coords[sample][factor][copy][r]`.
    coords: Vec<Vec<Vec<Vec<i128>>>>,
    max_index: usize,
}

/// A form with power sums reduced modulo its denominator.
#[derive(Debug, Clone)]
pub struct PreparedForm {
    form: ExactForm,
    p_mod: Vec<Vec<i128>>,
}

impl PairingEngine {
    /// `coords[sample][factor][copy]` are the integer coefficient vectors of `ρ⁻¹x`;
    /// `max_index` bounds `n + shift + r`.
    pub fn new(
        expansion: &Expansion,
        coords: Vec<Vec<Vec<Vec<BigInt>>>>,
        max_index: usize,
    ) -> Result<Self, SpectrumError> {
        let factors = expansion
            .factors()
            .iter()
            .map(|m| FactorData::new(m, max_index))
            .collect::<Result<Vec<_>, _>>()?;
        let too_big = || SpectrumError::InvalidArgument("module coordinate exceeds 128 bits".into());
        let coords = coords
            .into_iter()
            .map(|s| {
                s.into_iter()
                    .enumerate()
                    .map(|(f, copies)| {
                        copies
                            .into_iter()
                            .map(|mut c| {
                                c.resize(factors[f].deg, BigInt::from(0));
                                c.iter().map(|x| x.to_i128().ok_or_else(too_big)).collect::<Result<Vec<_>, _>>()
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PairingEngine { factors, coords, max_index })
    }

    pub fn samples(&self) -> usize {
        self.coords.len()
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    /// Largest absolute integer coordinate over the sample.
    pub fn max_coefficient(&self) -> f64 {
        self.coords.iter().flatten().flatten().flatten().map(|c| c.unsigned_abs() as f64).fold(0.0, f64::max)
    }

    pub fn prepare(&self, form: &ExactForm) -> Result<PreparedForm, SpectrumError> {
        if form.den <= 0 {
            return Err(SpectrumError::InvalidArgument("form denominator must be positive".into()));
        }
        for (m, _) in &form.terms {
            if m.factor >= self.factors.len() {
                return Err(SpectrumError::InvalidArgument(format!("factor {} out of range", m.factor)));
            }
        }
        let den = BigInt::from(form.den);
        let p_mod = self
            .factors
            .iter()
            .map(|f| {
                f.power_sums
                    .iter()
                    .map(|p| p.mod_floor(&den).to_i128().expect("reduced below the denominator"))
                    .collect()
            })
            .collect();
        Ok(PreparedForm { form: form.clone(), p_mod })
    }

    /// `max_x dist(⟨φⁿx, γ⟩, ℤ)`, or `None` once the residual part passes `2^53`.
    pub fn max_distance(&self, prep: &PreparedForm, n: usize) -> Result<Option<f64>, SpectrumError> {
        let form = &prep.form;
        let den = form.den;
        let needed = n + form.max_shift() + self.factors.iter().map(|f| f.deg).max().unwrap_or(1) - 1;
        if needed > self.max_index {
            return Err(SpectrumError::InvalidArgument(format!(
                "pairing index {needed} exceeds the prepared range {}",
                self.max_index
            )));
        }
        let mut worst: f64 = 0.0;
        for sample in &self.coords {
            let mut int_part: i128 = 0;
            let mut float_part = 0.0;
            for &(m, num) in &form.terms {
                let c = &sample[m.factor][m.copy];
                let fd = &self.factors[m.factor];
                let pm = &prep.p_mod[m.factor];
                let mut acc: i128 = 0;
                let mut res = 0.0;
                for (r, &cr) in c.iter().enumerate() {
                    if cr == 0 {
                        continue;
                    }
                    let idx = n + m.shift + r;
                    acc = (acc + cr.rem_euclid(den) * pm[idx]).rem_euclid(den);
                    res += cr as f64 * fd.residuals[idx];
                }
                int_part = (int_part + num.rem_euclid(den) * acc).rem_euclid(den);
                float_part += num as f64 / den as f64 * res;
            }
            if !float_part.is_finite() || float_part.abs() > OVERFLOW_GUARD {
                return Ok(None);
            }
            let value = int_part as f64 / den as f64 - float_part;
            worst = worst.max(dist_to_integers(value)?);
        }
        Ok(Some(worst))
    }
}
