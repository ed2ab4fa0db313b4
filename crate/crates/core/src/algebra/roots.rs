//! Certified isolation of the complex roots of a squarefree monic integer polynomial.
//!
//! Starting values come from the eigenvalues of the companion matrix. They are
//! polished with Newton steps (falling back to simultaneous Weierstrass steps
//! when two estimates collide) and then certified: with
//! `W_i = p(z_i) / prod_{j != i}(z_i - z_j)`, the polynomial is the
//! characteristic polynomial of `diag(z) - W 1^T`, whose Gershgorin discs lie in
//! `D(z_i, n |W_i|)`. When these discs are pairwise disjoint each one holds
//! exactly one root. Rounding error of the floating evaluation is folded into
//! the bound on `|p(z_i)|`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{AlgebraError, IntPolynomial};

/// A root estimate with a disc radius guaranteed to enclose exactly one root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedRoot {
    pub value: Complex64,
    pub radius: f64,
}

impl CertifiedRoot {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }

    /// Lower and upper bounds on the modulus of the enclosed root.
    pub fn modulus_bounds(&self) -> (f64, f64) {
        let m = self.value.norm();
        ((m - self.radius).max(0.0), m + self.radius)
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        (self.value - z).norm() <= self.radius + slack
    }
}

/// All roots of a polynomial, sorted by decreasing modulus.
///
/// `pairing[i]` is the index of the complex conjugate of root `i`, or `None`
/// for real roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<CertifiedRoot>,
    pub pairing: Vec<Option<usize>>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.roots.iter().map(|r| r.radius).fold(0.0, f64::max)
    }

    /// Index of the root whose disc (widened by `tol`) contains `z`.
    pub fn find(&self, z: Complex64, tol: f64) -> Option<usize> {
        self.roots
            .iter()
            .enumerate()
            .filter(|(_, r)| r.contains(z, tol))
            .min_by(|a, b| {
                let da = (a.1.value - z).norm();
                let db = (b.1.value - z).norm();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
    }
}

const MAX_POLISH_ROUNDS: usize = 60;

/// Isolates every root of `poly` in a certified disc of radius at most `precision`.
pub fn isolate_roots(poly: &IntPolynomial, precision: f64) -> Result<RootSet, AlgebraError> {
    if !poly.is_monic() {
        return Err(AlgebraError::NonMonic);
    }
    let n = poly.degree();
    if n == 0 {
        return Err(AlgebraError::ConstantPolynomial);
    }
    if !(precision > 0.0) {
        return Err(AlgebraError::InvalidPrecision(precision));
    }
    let rp = poly.to_rational();
    if rp.gcd(&rp.derivative()).degree() != Some(0) {
        return Err(AlgebraError::NotSquarefree);
    }

    let coeffs = poly.coeffs_f64();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(AlgebraError::CoefficientOverflow);
    }

    if n == 1 {
        let c0 = &poly.coeffs()[0];
        let v = -coeffs[0];
        // Exact unless the constant term is beyond 2^53.
        let exact = c0.to_i64().is_some_and(|c| c.unsigned_abs() <= 1u64 << 53);
        let radius = if exact { 0.0 } else { v.abs() * f64::EPSILON };
        if radius > precision {
            return Err(AlgebraError::PrecisionUnattainable { achieved: radius });
        }
        return Ok(RootSet {
            roots: vec![CertifiedRoot { value: Complex64::new(v, 0.0), radius }],
            pairing: vec![None],
        });
    }

    let mut z = companion_eigenvalues(&coeffs);
    let mut best: Option<(Vec<CertifiedRoot>, f64)> = None;
    for round in 0..MAX_POLISH_ROUNDS {
        if round % 2 == 0 {
            newton_polish(poly, &coeffs, &mut z);
        } else {
            weierstrass_step(poly, &coeffs, &mut z);
        }
        if let Some(cert) = certify(poly, &coeffs, &z) {
            let worst = cert.iter().map(|r| r.radius).fold(0.0, f64::max);
            let improved = best.as_ref().is_none_or(|(_, w)| worst < *w);
            if improved {
                best = Some((cert, worst));
            }
            if worst <= precision && round >= 2 {
                break;
            }
        }
    }

    let (roots, worst) = best.ok_or(AlgebraError::CertificationFailed)?;
    if worst > precision {
        return Err(AlgebraError::PrecisionUnattainable { achieved: worst });
    }
    Ok(finish(roots))
}

fn companion_eigenvalues(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i];
    }
    let mut eig: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    // Nudge exact duplicates apart so the Weierstrass quotient is defined.
    for i in 0..eig.len() {
        for j in 0..i {
            if eig[i] == eig[j] {
                eig[i] += Complex64::new(1e-7 * (1.0 + i as f64), 1e-7);
            }
        }
    }
    eig
}

fn newton_polish(poly: &IntPolynomial, coeffs: &[f64], z: &mut [Complex64]) {
    for zi in z.iter_mut() {
        for _ in 0..4 {
            let (v, d, _) = poly.eval_with_error(coeffs, *zi);
            if d.norm() == 0.0 || !v.is_finite() {
                break;
            }
            let step = v / d;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
}

fn weierstrass_step(poly: &IntPolynomial, coeffs: &[f64], z: &mut [Complex64]) {
    let old = z.to_vec();
    for i in 0..z.len() {
        let (v, _, _) = poly.eval_with_error(coeffs, old[i]);
        let denom: Complex64 = old
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, zj)| old[i] - zj)
            .product();
        if denom.norm() > 0.0 {
            let w = v / denom;
            if w.is_finite() {
                z[i] = old[i] - w;
            }
        }
    }
}

fn certify(poly: &IntPolynomial, coeffs: &[f64], z: &[Complex64]) -> Option<Vec<CertifiedRoot>> {
    let n = z.len();
    let u = f64::EPSILON / 2.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (v, _, err) = poly.eval_with_error(coeffs, z[i]);
        let denom: Complex64 = z
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, zj)| z[i] - zj)
            .product();
        let dn = denom.norm() * (1.0 - 8.0 * n as f64 * u);
        if !(dn > 0.0) || !v.is_finite() {
            return None;
        }
        let w = (v.norm() + err) / dn * (1.0 + 8.0 * n as f64 * u);
        out.push(CertifiedRoot { value: z[i], radius: n as f64 * w });
    }
    // Snap discs that straddle the real axis onto it; the conjugate of the
    // enclosed root lies in the same disc, so by uniqueness the root is real.
    for r in out.iter_mut() {
        if r.value.im.abs() <= r.radius {
            r.radius += r.value.im.abs();
            r.value.im = 0.0;
        }
    }
    for i in 0..n {
        for j in 0..i {
            if (out[i].value - out[j].value).norm() <= out[i].radius + out[j].radius {
                return None;
            }
        }
    }
    Some(out)
}

fn finish(mut roots: Vec<CertifiedRoot>) -> RootSet {
    roots.sort_by(|a, b| {
        b.value
            .norm()
            .total_cmp(&a.value.norm())
            .then(b.value.im.total_cmp(&a.value.im))
            .then(b.value.re.total_cmp(&a.value.re))
    });
    // Conjugate pairs have equal modulus; make them mirror images exactly.
    let n = roots.len();
    let mut pairing = vec![None; n];
    for i in 0..n {
        if roots[i].is_real() || pairing[i].is_some() {
            continue;
        }
        let target = roots[i].value.conj();
        let partner = (0..n)
            .filter(|&j| j != i && pairing[j].is_none() && !roots[j].is_real())
            .min_by(|&a, &b| {
                (roots[a].value - target)
                    .norm()
                    .total_cmp(&(roots[b].value - target).norm())
            });
        if let Some(j) = partner {
            pairing[i] = Some(j);
            pairing[j] = Some(i);
            let r = roots[i].radius.max(roots[j].radius)
                + (roots[j].value - target).norm() / 2.0;
            let mid = (roots[i].value + roots[j].value.conj()) / 2.0;
            roots[i] = CertifiedRoot { value: mid, radius: r };
            roots[j] = CertifiedRoot { value: mid.conj(), radius: r };
        }
    }
    RootSet { roots, pairing }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c).unwrap()
    }

    /// Real roots of a cubic by sign-change bisection; independent of the companion route.
    fn bisect(poly: &IntPolynomial, mut lo: f64, mut hi: f64) -> f64 {
        let f = |x: f64| poly.eval_complex(Complex64::new(x, 0.0)).re;
        let mut flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_root() {
        let rs = isolate_roots(&p(&[-2, 1]), 1e-12).unwrap();
        assert_eq!(rs.roots[0].value, Complex64::new(2.0, 0.0));
        assert!(rs.roots[0].radius <= 1e-12);
    }

    #[test]
    fn cubic_from_the_worked_example() {
        let poly = p(&[3, -4, -1, 1]);
        let rs = isolate_roots(&poly, 1e-12).unwrap();
        let vals: Vec<f64> = rs.roots.iter().map(|r| r.value.re).collect();
        assert!((vals[0] - 2.19869).abs() < 5e-6);
        assert!((vals[1] + 1.91223).abs() < 5e-6);
        assert!((vals[2] - 0.71354).abs() < 5e-6);
        // independent oracle
        for (v, (lo, hi)) in vals.iter().zip([(2.0, 3.0), (-3.0, -1.0), (0.0, 1.0)]) {
            assert!((v - bisect(&poly, lo, hi)).abs() < 1e-12);
        }
        assert!(rs.roots.iter().all(|r| r.is_real() && r.radius <= 1e-12));
    }

    #[test]
    fn golden_ratio() {
        let rs = isolate_roots(&p(&[-1, -1, 1]), 1e-12).unwrap();
        let s5 = 5f64.sqrt();
        assert!((rs.roots[0].value.re - (1.0 + s5) / 2.0).abs() < 1e-14);
        assert!((rs.roots[1].value.re - (1.0 - s5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_pair_is_mirrored() {
        // x^3 - x - 3: one real root and a conjugate pair of modulus > 1.
        let rs = isolate_roots(&p(&[-3, -1, 0, 1]), 1e-12).unwrap();
        let pairs: Vec<_> = rs.pairing.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect();
        assert_eq!(pairs.len(), 2);
        let (i, j) = pairs[0];
        assert_eq!(rs.roots[i].value, rs.roots[j].value.conj());
        assert!(rs.roots[i].value.norm() > 1.0);
    }

    #[test]
    fn rejects_repeated_roots_and_non_monic() {
        assert!(matches!(isolate_roots(&p(&[1, -2, 1]), 1e-9), Err(AlgebraError::NotSquarefree)));
        assert!(matches!(isolate_roots(&p(&[1, 2]), 1e-9), Err(AlgebraError::NonMonic)));
    }

    #[test]
    fn cyclotomic_roots_on_the_unit_circle() {
        let rs = isolate_roots(&p(&[1, 1, 1, 1, 1]), 1e-10).unwrap();
        for r in &rs.roots {
            assert!((r.value.norm() - 1.0).abs() < 1e-10);
        }
    }
}
