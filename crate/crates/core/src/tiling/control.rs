//! Control points from the tile map: `φ(c(T)) = c(γT)`.
//!
//! With `γ(T_j) = (i(j), u_j)` the offsets satisfy `o_j = φ⁻¹(u_j + o_{i(j)})`.

use crate::algebra::RatPolynomial;
use crate::expansion::{BlockVector, ExpansionMap, ModuleCoords};

use super::{ExactPoint, SubstitutionRule, TilingError, TilingPatch};

const ITERATION_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 100_000;

/// Per-type control-point offsets `c(x + T_j) = x + o_j`.
#[derive(Debug, Clone)]
pub struct ControlOffsets {
    pub offsets: Vec<BlockVector>,
    pub exact: Option<Vec<ExactPoint>>,
    pub iterations: usize,
}

/// Control points of a patch, one per tile.
#[derive(Debug, Clone)]
pub struct ControlPoints {
    pub points: Vec<BlockVector>,
    pub exact: Option<Vec<ExactPoint>>,
}

impl SubstitutionRule {
    pub fn control_offsets(&self) -> Result<ControlOffsets, TilingError> {
        let kappa = self.kappa();
        let e = self.expansion();
        let mut o = vec![BlockVector::zeros(self.dim()); kappa];
        let mut iterations = 0;
        loop {
            iterations += 1;
            let mut next = Vec::with_capacity(kappa);
            for j in 0..kappa {
                let c = self.designated(j);
                next.push(e.apply_inverse(&(&c.offset + &o[c.label]))?);
            }
            let mut change: f64 = 0.0;
            for (a, b) in next.iter().zip(&o) {
                change = change.max(e.block_norm(&(a - b))?);
            }
            o = next;
            if change < ITERATION_TOL || iterations >= MAX_ITERATIONS {
                break;
            }
        }
        let exact = if self.has_exact() { Some(self.exact_offsets()?) } else { None };
        Ok(ControlOffsets { offsets: o, exact, iterations })
    }

    /// Solves the offset equations exactly: around each cycle `j_0 → … → j_{L−1}`
    /// of the tile map, `o_{j_0} = (1 − φ^{−L})⁻¹ Σ_k φ^{−(k+1)} u_{j_k}`.
    fn exact_offsets(&self) -> Result<Vec<ExactPoint>, TilingError> {
        let kappa = self.kappa();
        let factors = self.expansion().factors();
        let mut per_factor: Vec<Vec<ModuleCoords>> = Vec::with_capacity(factors.len());
        for (f, map) in factors.iter().enumerate() {
            let u = |j: usize| self.designated(j).exact.as_ref().expect("exact digits")[f].clone();
            let next = |j: usize| self.designated(j).label;
            let mut known: Vec<Option<ModuleCoords>> = vec![None; kappa];
            for start in 0..kappa {
                if known[start].is_some() {
                    continue;
                }
                // Walk until a known node or a repeat.
                let mut path = vec![start];
                let mut cur = next(start);
                while known[cur].is_none() && !path.contains(&cur) {
                    path.push(cur);
                    cur = next(cur);
                }
                if known[cur].is_none() {
                    let pos = path.iter().position(|&x| x == cur).expect("cycle node on path");
                    let cycle = &path[pos..];
                    let value = cycle_offset(map, cycle.iter().map(|&j| u(j)).collect())?;
                    known[cur] = Some(value);
                }
                for &j in path.iter().rev() {
                    if known[j].is_none() {
                        let target = known[next(j)].clone().expect("successor solved");
                        known[j] = Some(map.module_mul_phi_inverse(&u(j).add(&target))?);
                    }
                }
            }
            per_factor.push(known.into_iter().map(|k| k.expect("all solved")).collect());
        }
        Ok((0..kappa).map(|j| per_factor.iter().map(|v| v[j].clone()).collect()).collect())
    }

    pub fn control_points(&self, patch: &TilingPatch) -> Result<ControlPoints, TilingError> {
        let off = self.control_offsets()?;
        Ok(control_points_with(patch, &off))
    }
}

pub(crate) fn control_points_with(patch: &TilingPatch, off: &ControlOffsets) -> ControlPoints {
    let points = patch.tiles.iter().map(|t| &t.translation + &off.offsets[t.label]).collect();
    let exact = match (&off.exact, patch.has_exact()) {
        (Some(ex), true) => Some(
            patch
                .tiles
                .iter()
                .map(|t| {
                    let te = t.exact.as_ref().expect("exact tile");
                    te.iter().zip(&ex[t.label]).map(|(a, b)| a.add(b)).collect()
                })
                .collect(),
        ),
        _ => None,
    };
    ControlPoints { points, exact }
}

fn cycle_offset(map: &ExpansionMap, us: Vec<ModuleCoords>) -> Result<ModuleCoords, TilingError> {
    let field = map.field();
    let x_inv = field.inv(&RatPolynomial::monomial(1)).map_err(crate::expansion::ExpansionError::from)?;
    let mut sum = map.module_zero();
    let mut pow = x_inv.clone();
    for u in &us {
        sum = sum.add(&map.module_mul(&pow, u));
        pow = field.mul(&pow, &x_inv);
    }
    // pow is now x^{-(L+1)}; the cycle factor uses x^{-L}.
    let x_l = field.mul(&pow, &RatPolynomial::monomial(1));
    let factor = field.sub(&RatPolynomial::one(), &x_l);
    let inv = field.inv(&factor).map_err(crate::expansion::ExpansionError::from)?;
    Ok(map.module_mul(&inv, &sum))
}

#[cfg(test)]
mod tests {
    use super::super::rule::tests::{fib, fib_json, PHI};
    use super::*;

    #[test]
    fn leftmost_child_gives_left_endpoints() {
        let r = fib();
        let off = r.control_offsets().unwrap();
        assert!(off.offsets.iter().all(|o| o[0].abs() < 1e-15));
        let ex = off.exact.unwrap();
        assert!(ex.iter().all(|p| p.iter().all(ModuleCoords::is_zero)));
    }

    #[test]
    fn rightmost_child_matches_iteration() {
        // γ(a) = b at 1, γ(b) = a at 0.
        let json = fib_json(1.0, 1.0 / PHI).replace(r#""tile_map":[0,0]"#, r#""tile_map":[1,0]"#);
        let r = SubstitutionRule::from_json(&json).unwrap();
        let off = r.control_offsets().unwrap();
        // Oracle: 30 plain iterations of the affine map.
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            let na = (1.0 + b) / PHI;
            let nb = a / PHI;
            a = na;
            b = nb;
        }
        assert!((off.offsets[0][0] - a).abs() < 1e-12);
        assert!((off.offsets[1][0] - b).abs() < 1e-12);
        // Closed form: a = φ/(φ² − 1) = 1.
        assert!((a - 1.0).abs() < 1e-12);
        let ex = off.exact.unwrap();
        let map = &r.expansion().factors()[0];
        assert!((map.embed(&ex[0][0])[0] - a).abs() < 1e-12);
        assert!((map.embed(&ex[1][0])[0] - b).abs() < 1e-12);
    }
}
