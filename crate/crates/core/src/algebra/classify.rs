//! Pisot, Perron and Pisot-family verdicts on certified root sets.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use super::{isolate_roots, AlgebraError, IntPolynomial, RootSet};

/// Outcome of a modulus comparison that may be too close to call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Undecidable,
}

/// A conjugation-closed subset of the roots of one minimal polynomial, taken
/// with a common multiplicity: the spectrum of an expansion map.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSelection {
    poly: IntPolynomial,
    roots: RootSet,
    selected: BTreeSet<usize>,
    multiplicity: usize,
}

impl SpectrumSelection {
    pub fn new(
        poly: IntPolynomial,
        roots: RootSet,
        selected: impl IntoIterator<Item = usize>,
        multiplicity: usize,
    ) -> Result<Self, AlgebraError> {
        let selected: BTreeSet<usize> = selected.into_iter().collect();
        if selected.is_empty() {
            return Err(AlgebraError::EmptySelection);
        }
        if multiplicity == 0 {
            return Err(AlgebraError::InvalidSelection("multiplicity must be positive".into()));
        }
        if roots.len() != poly.degree() {
            return Err(AlgebraError::InvalidSelection(
                "root set does not belong to this polynomial".into(),
            ));
        }
        for &i in &selected {
            if i >= roots.len() {
                return Err(AlgebraError::InvalidSelection(format!("root index {i} out of range")));
            }
            if let Some(j) = roots.pairing[i] {
                if !selected.contains(&j) {
                    return Err(AlgebraError::NotConjugationClosed { index: i });
                }
            }
        }
        Ok(SpectrumSelection { poly, roots, selected, multiplicity })
    }

    /// Selects the roots matching `values` (each within its disc plus `tol`).
    pub fn from_values(
        poly: IntPolynomial,
        roots: RootSet,
        values: &[Complex64],
        multiplicity: usize,
        tol: f64,
    ) -> Result<Self, AlgebraError> {
        let idx = values
            .iter()
            .map(|&v| roots.find(v, tol).ok_or(AlgebraError::NotARoot { re: v.re, im: v.im }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(poly, roots, idx, multiplicity)
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn selected(&self) -> &BTreeSet<usize> {
        &self.selected
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn excluded(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.roots.len()).filter(|i| !self.selected.contains(i))
    }

    /// `true` when every selected root certifiably lies outside the unit disc.
    pub fn is_expanding(&self) -> bool {
        self.selected.iter().all(|&i| self.roots.roots[i].modulus_bounds().0 > 1.0)
    }
}

/// Decides whether the selected roots form a Pisot family: every conjugate
/// outside the selection must have modulus strictly below one. A disc that
/// reaches within `tol` of the unit circle makes the answer undecidable.
pub fn is_pisot_family(sel: &SpectrumSelection, tol: f64) -> Verdict {
    let mut verdict = Verdict::Yes;
    for i in sel.excluded() {
        let (lo, hi) = sel.roots.roots[i].modulus_bounds();
        if hi < 1.0 - tol {
            continue;
        }
        if lo > 1.0 + tol {
            return Verdict::No;
        }
        verdict = Verdict::Undecidable;
    }
    verdict
}

/// Index of the largest real root exceeding one.
fn dominant_real_root(roots: &RootSet) -> Result<usize, AlgebraError> {
    roots
        .roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_real() && r.value.re - r.radius > 1.0)
        .max_by(|a, b| a.1.value.re.total_cmp(&b.1.value.re))
        .map(|(i, _)| i)
        .ok_or(AlgebraError::NoDominantRealRoot)
}

/// Real algebraic integer above one whose other conjugates all lie strictly inside the unit disc.
pub fn is_pisot_number(poly: &IntPolynomial, precision: f64) -> Result<bool, AlgebraError> {
    let roots = isolate_roots(poly, precision)?;
    let top = dominant_real_root(&roots)?;
    let sel = SpectrumSelection::new(poly.clone(), roots, [top], 1)?;
    match is_pisot_family(&sel, 0.0) {
        Verdict::Yes => Ok(true),
        Verdict::No => Ok(false),
        Verdict::Undecidable => Err(AlgebraError::Undecidable),
    }
}

/// Real algebraic integer above one strictly dominating all its other conjugates in modulus.
pub fn is_perron_root(poly: &IntPolynomial, precision: f64) -> Result<bool, AlgebraError> {
    let roots = isolate_roots(poly, precision)?;
    let top = dominant_real_root(&roots)?;
    let theta = roots.roots[top];
    let theta_lo = theta.value.re - theta.radius;
    let theta_hi = theta.value.re + theta.radius;
    let mut undecided = false;
    for (i, r) in roots.roots.iter().enumerate() {
        if i == top {
            continue;
        }
        let (lo, hi) = r.modulus_bounds();
        if hi < theta_lo {
            continue;
        }
        if lo >= theta_hi {
            return Ok(false);
        }
        undecided = true;
    }
    if undecided {
        Err(AlgebraError::Undecidable)
    } else {
        Ok(true)
    }
}
