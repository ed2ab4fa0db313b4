use rayon::prelude::*;

use super::{ExactPoint, SubstitutionRule, TilingError};
use crate::algebra::RatPolynomial;
use crate::expansion::{BlockVector, ExpansionError};

pub const DEFAULT_TILE_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct Tile {
    /// 0-based type.
    pub label: usize,
    pub translation: BlockVector,
    pub exact: Option<ExactPoint>,
}

#[derive(Debug, Clone)]
pub struct TilingPatch {
    pub tiles: Vec<Tile>,
    /// Number of substitution steps applied since the seed.
    pub generation: usize,
}

/// A tile fixed by `ω^power`.
#[derive(Debug, Clone)]
pub struct Seed {
    pub patch: TilingPatch,
    pub power: usize,
}

impl TilingPatch {
    pub fn single(tile: Tile) -> Self {
        TilingPatch { tiles: vec![tile], generation: 0 }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn has_exact(&self) -> bool {
        self.tiles.iter().all(|t| t.exact.is_some())
    }

    /// Tiles of each type.
    pub fn census(&self, kappa: usize) -> Vec<u64> {
        let mut c = vec![0; kappa];
        for t in &self.tiles {
            c[t.label] += 1;
        }
        c
    }
}

impl SubstitutionRule {
    /// A tile of type `label` at the origin, with exact zero coordinates when available.
    pub fn origin_tile(&self, label: usize) -> Tile {
        let exact = self
            .has_exact()
            .then(|| self.expansion().factors().iter().map(|f| f.module_zero()).collect());
        Tile { label, translation: BlockVector::zeros(self.dim()), exact }
    }

    /// Applies `ω` `k` times: `ω(x + T_j) = φx + ω(T_j)`.
    pub fn expand(&self, patch: &TilingPatch, k: usize, cap: usize) -> Result<TilingPatch, TilingError> {
        let mut cur = patch.clone();
        for _ in 0..k {
            let needed: usize = cur.tiles.iter().map(|t| self.children(t.label).len()).sum();
            if needed > cap {
                return Err(TilingError::ResourceLimit { needed, cap });
            }
            let e = self.expansion();
            let tiles: Result<Vec<Vec<Tile>>, ExpansionError> = cur
                .tiles
                .par_iter()
                .map(|t| {
                    let base = e.apply(&t.translation)?;
                    let base_exact: Option<ExactPoint> = t.exact.as_ref().map(|ex| {
                        ex.iter().zip(e.factors()).map(|(c, f)| f.module_mul_phi(c)).collect()
                    });
                    Ok(self
                        .children(t.label)
                        .iter()
                        .map(|c| Tile {
                            label: c.label,
                            translation: &base + &c.offset,
                            exact: match (&base_exact, &c.exact) {
                                (Some(b), Some(u)) => Some(b.iter().zip(u).map(|(x, y)| x.add(y)).collect()),
                                _ => None,
                            },
                        })
                        .collect())
                })
                .collect();
            cur = TilingPatch { tiles: tiles?.into_iter().flatten().collect(), generation: cur.generation + 1 };
        }
        Ok(cur)
    }

    /// Finds the smallest `p` and a type `j` such that `ω^p(T_j)` contains a
    /// type-`j` tile at some `v`; the seed `x = −(φ^p − I)⁻¹v` then satisfies
    /// `x + T_j ∈ ω^p(x + T_j)`. Types and children are scanned in
    /// (type, translation-lexicographic) order.
    pub fn fixed_point_seed(&self) -> Result<Seed, TilingError> {
        let max_digits = self.digits().iter().flatten().map(Vec::len).max().unwrap_or(1);
        let max_power = (self.kappa() * max_digits).max(self.kappa() * self.kappa()).max(1);
        let e = self.expansion();
        let d = self.dim();
        let phi = e.matrix();
        let mut phi_p = nalgebra::DMatrix::<f64>::identity(d, d);
        for p in 1..=max_power {
            phi_p = &phi * phi_p;
            for j in 0..self.kappa() {
                let img = self.expand(&TilingPatch::single(self.origin_tile(j)), p, DEFAULT_TILE_CAP)?;
                let mut same: Vec<&Tile> = img.tiles.iter().filter(|t| t.label == j).collect();
                if same.is_empty() {
                    continue;
                }
                same.sort_by(|a, b| {
                    a.translation
                        .iter()
                        .zip(b.translation.iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let v = &same[0];
                let shifted = &phi_p - nalgebra::DMatrix::<f64>::identity(d, d);
                let inv = shifted.try_inverse().ok_or(ExpansionError::NotExpanding)?;
                let x = (inv * &v.translation).map(|c| 0.0 - c);
                let exact = match &v.exact {
                    Some(ve) => Some(
                        ve.iter()
                            .zip(e.factors())
                            .map(|(c, f)| {
                                let field = f.field();
                                let t = field.sub(&RatPolynomial::monomial(p), &RatPolynomial::one());
                                let inv = field.inv(&t).map_err(ExpansionError::from)?;
                                Ok(f.module_mul(&inv, c).neg())
                            })
                            .collect::<Result<Vec<_>, TilingError>>()?,
                    ),
                    None => None,
                };
                let tile = Tile { label: j, translation: x, exact };
                return Ok(Seed { patch: TilingPatch::single(tile), power: p });
            }
        }
        Err(TilingError::NoSeedFound { max_power })
    }
}
