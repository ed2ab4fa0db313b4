//! Exact coordinates in the module `ℚ[φ]α_1 + … + ℚ[φ]α_J`.
//!
//! A point `Σ_j c_j(φ) α_j` is stored as the `J` reduced polynomials `c_j`.
//! On `H_j` its real coordinates are `c_j(ψ)·1`: `c_j(λ_k)` in a real slot and
//! the real and imaginary parts of `c_j(λ)(1 + i)` in a complex pair.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{BlockVector, ExpansionError, ExpansionMap};
use crate::algebra::RatPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModuleCoords(pub Vec<RatPolynomial>);

impl ModuleCoords {
    pub fn parts(&self) -> &[RatPolynomial] {
        &self.0
    }

    pub fn add(&self, other: &ModuleCoords) -> ModuleCoords {
        ModuleCoords(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, other: &ModuleCoords) -> ModuleCoords {
        ModuleCoords(self.0.iter().zip(&other.0).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn neg(&self) -> ModuleCoords {
        ModuleCoords(self.0.iter().map(RatPolynomial::neg).collect())
    }

    pub fn scale(&self, s: &BigRational) -> ModuleCoords {
        ModuleCoords(self.0.iter().map(|a| a.scale(s)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(RatPolynomial::is_zero)
    }

    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.0.iter().fold(BigInt::from(1), |acc, p| acc.lcm(&p.denominator_lcm()))
    }

    /// Largest absolute coefficient, as a float.
    pub fn max_abs_coeff(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|p| p.coeffs().iter())
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY).abs())
            .fold(0.0, f64::max)
    }
}

/// Bounds for the integer-relation search that recovers module coordinates from floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoverySearch {
    /// Largest absolute integer tried for each undetermined coefficient.
    pub coeff_bound: i64,
    /// Denominators `1..=max_denominator` are scanned.
    pub max_denominator: u32,
    /// Residual allowed, relative to `1 + |q·v|`.
    pub tolerance: f64,
}

impl Default for RecoverySearch {
    fn default() -> Self {
        RecoverySearch { coeff_bound: 64, max_denominator: 12, tolerance: 1e-8 }
    }
}

impl ExpansionMap {
    pub fn module_zero(&self) -> ModuleCoords {
        ModuleCoords(vec![RatPolynomial::zero(); self.multiplicity()])
    }

    /// The generator `α_j` itself.
    pub fn module_alpha(&self, j: usize) -> ModuleCoords {
        let mut c = self.module_zero();
        c.0[j] = RatPolynomial::one();
        c
    }

    pub fn module_mul_phi(&self, c: &ModuleCoords) -> ModuleCoords {
        ModuleCoords(c.0.iter().map(|p| self.field().mul_x(p)).collect())
    }

    pub fn module_mul_phi_inverse(&self, c: &ModuleCoords) -> Result<ModuleCoords, ExpansionError> {
        let inv_x = self.field().inv(&RatPolynomial::monomial(1))?;
        Ok(ModuleCoords(c.0.iter().map(|p| self.field().mul(p, &inv_x)).collect()))
    }

    /// Multiplies every part by the field element `a`.
    pub fn module_mul(&self, a: &RatPolynomial, c: &ModuleCoords) -> ModuleCoords {
        ModuleCoords(c.0.iter().map(|p| self.field().mul(a, p)).collect())
    }

    /// Real `m×n` matrix sending the coefficients of `c_j` to the coordinates of `c_j(ψ)·1`.
    pub fn embedding_matrix(&self) -> DMatrix<f64> {
        let n = self.min_poly().degree();
        let m = self.m();
        let s = self.s();
        let mut e = DMatrix::zeros(m, n);
        for (k, &lam) in self.real_blocks().iter().enumerate() {
            let mut pow = 1.0;
            for r in 0..n {
                e[(k, r)] = pow;
                pow *= lam;
            }
        }
        for (k, &(a, b)) in self.complex_blocks().iter().enumerate() {
            let lam = Complex64::new(a, b);
            let mut pow = Complex64::new(1.0, 1.0);
            for r in 0..n {
                e[(s + 2 * k, r)] = pow.re;
                e[(s + 2 * k + 1, r)] = pow.im;
                pow *= lam;
            }
        }
        e
    }

    pub fn embed(&self, c: &ModuleCoords) -> BlockVector {
        let e = self.embedding_matrix();
        let n = self.min_poly().degree();
        let m = self.m();
        let mut x = DVector::zeros(self.dim());
        for (j, p) in c.0.iter().enumerate() {
            let coeffs = DVector::from_fn(n, |r, _| p.coeff(r).to_f64().unwrap_or(f64::NAN));
            x.rows_mut(j * m, m).copy_from(&(&e * coeffs));
        }
        x
    }

    /// Finds rational module coordinates for a real vector by a bounded search:
    /// for each denominator `q`, the `n − m` trailing coefficients range over
    /// integer shells of increasing size, the leading `m` are solved for and
    /// rounded, and the first candidate with a small residual wins.
    pub fn recover_module(&self, v: &BlockVector, search: &RecoverySearch) -> Result<ModuleCoords, ExpansionError> {
        if v.len() != self.dim() {
            return Err(ExpansionError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let n = self.min_poly().degree();
        let m = self.m();
        let e = self.embedding_matrix();
        let lead = e.columns(0, m).into_owned();
        let lead_inv = lead.try_inverse().ok_or(ExpansionError::DegenerateBasis { determinant: 0.0 })?;
        let tail = e.columns(m, n - m).into_owned();

        let mut parts = Vec::with_capacity(self.multiplicity());
        let mut worst = 0.0f64;
        for j in 0..self.multiplicity() {
            let local = v.rows(j * m, m).into_owned();
            let mut found = None;
            let mut best_residual = f64::INFINITY;
            'den: for q in 1..=search.max_denominator.max(1) {
                let target = &local * q as f64;
                let scale = 1.0 + target.amax();
                let mut hit = None;
                for_each_shell(n - m, search.coeff_bound, |free| {
                    let fv = DVector::from_fn(n - m, |r, _| free[r] as f64);
                    let rhs = &target - &tail * &fv;
                    let lead_c = (&lead_inv * rhs).map(f64::round);
                    let mut full = DVector::zeros(n);
                    full.rows_mut(0, m).copy_from(&lead_c);
                    full.rows_mut(m, n - m).copy_from(&fv);
                    let residual = (&e * &full - &target).amax() / scale;
                    best_residual = best_residual.min(residual);
                    if residual <= search.tolerance {
                        hit = Some(full);
                        true
                    } else {
                        false
                    }
                });
                if let Some(full) = hit {
                    let den = BigInt::from(q);
                    let coeffs = full
                        .iter()
                        .map(|&c| BigRational::new(BigInt::from(c as i64), den.clone()))
                        .collect();
                    found = Some(RatPolynomial::new(coeffs));
                    break 'den;
                }
            }
            match found {
                Some(p) => parts.push(p),
                None => {
                    worst = worst.max(best_residual);
                    return Err(ExpansionError::NoModuleRelation { residual: worst });
                }
            }
        }
        Ok(ModuleCoords(parts))
    }
}

/// Visits the integer vectors of `[-bound, bound]^dim` shell by shell
/// (increasing max-norm) until the callback returns `true`.
fn for_each_shell(dim: usize, bound: i64, mut visit: impl FnMut(&[i64]) -> bool) {
    if dim == 0 {
        visit(&[]);
        return;
    }
    let mut v = vec![0i64; dim];
    for r in 0..=bound {
        // Odometer over [-r, r]^dim, keeping only vectors touching the shell.
        v.iter_mut().for_each(|x| *x = -r);
        loop {
            if v.iter().any(|x| x.abs() == r) && visit(&v) {
                return;
            }
            let mut i = 0;
            loop {
                if i == dim {
                    break;
                }
                if v[i] < r {
                    v[i] += 1;
                    break;
                }
                v[i] = -r;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
    }
}

/// True when every coefficient is an integer, i.e. the point lies in `ℤ[φ]α_1 + … + ℤ[φ]α_J`.
pub fn is_integral(c: &ModuleCoords) -> bool {
    c.0.iter().all(|p| p.coeffs().iter().all(|x| x.is_integer()))
}

pub fn coords_to_integers(c: &ModuleCoords) -> Option<Vec<Vec<BigInt>>> {
    c.0.iter()
        .map(|p| p.to_integer())
        .collect::<Option<Vec<_>>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{isolate_roots, IntPolynomial};
    use nalgebra::dvector;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn golden(j: usize) -> ExpansionMap {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        ExpansionMap::new(p, vec![1.618033988749895], vec![], j).unwrap()
    }

    fn nonpisot() -> ExpansionMap {
        let p = IntPolynomial::from_i64(&[-3, -1, 0, 1]).unwrap();
        let roots = isolate_roots(&p, 1e-12).unwrap();
        let real = roots.roots.iter().find(|r| r.is_real()).unwrap().value.re;
        ExpansionMap::new(p, vec![real], vec![], 1).unwrap()
    }

    #[test]
    fn shells_visit_every_vector_once() {
        let mut seen = Vec::new();
        for_each_shell(2, 2, |v| {
            seen.push(v.to_vec());
            false
        });
        assert_eq!(seen.len(), 25);
        assert_eq!(seen[0], vec![0, 0]);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 25);
    }

    #[test]
    fn embed_and_multiply_commute() {
        let e = nonpisot();
        let c = ModuleCoords(vec![RatPolynomial::from_i64(&[2, -1, 3])]);
        let lhs = e.embed(&e.module_mul_phi(&c));
        let rhs = e.apply(&e.embed(&c)).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        let back = e.module_mul_phi_inverse(&e.module_mul_phi(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn recovers_golden_integers() {
        let e = golden(1);
        let phi = 1.618033988749895;
        let c = e.recover_module(&dvector![3.0 - 2.0 * phi], &RecoverySearch::default()).unwrap();
        assert_eq!(c.0[0], RatPolynomial::from_i64(&[3, -2]));
        let c = e.recover_module(&dvector![(1.0 + phi) / 3.0], &RecoverySearch::default()).unwrap();
        assert_eq!(c.0[0].denominator_lcm(), BigInt::from(3));
    }

    #[test]
    fn recovers_random_module_points() {
        let e = nonpisot();
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..20 {
            let c = ModuleCoords(vec![RatPolynomial::from_i64(&[
                rng.random_range(-9..9),
                rng.random_range(-9..9),
                rng.random_range(-9..9),
            ])]);
            let v = e.embed(&c);
            assert_eq!(e.recover_module(&v, &RecoverySearch::default()).unwrap(), c);
        }
    }

    #[test]
    fn random_real_has_no_small_relation() {
        let e = golden(1);
        let err = e.recover_module(&dvector![0.123456789123], &RecoverySearch::default()).unwrap_err();
        assert!(matches!(err, ExpansionError::NoModuleRelation { .. }));
    }
}
