//! Arithmetic in ℚ[x]/(p) for a monic minimal polynomial p.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{AlgebraError, IntPolynomial, RatPolynomial};

/// Inverse of `q` modulo `p` by the extended Euclidean algorithm.
///
/// A non-constant gcd is reported as a reducibility witness.
pub fn field_inverse(q: &RatPolynomial, p: &IntPolynomial) -> Result<RatPolynomial, AlgebraError> {
    if !p.is_monic() {
        return Err(AlgebraError::NonMonic);
    }
    let modulus = p.to_rational();
    let q = q.rem(&modulus);
    if q.is_zero() {
        return Err(AlgebraError::NotInvertible);
    }
    // Invariant: t_k * q ≡ r_k (mod p).
    let (mut r0, mut r1) = (modulus.clone(), q);
    let (mut t0, mut t1) = (RatPolynomial::zero(), RatPolynomial::one());
    while !r1.is_zero() {
        let (quot, rem) = r0.div_rem(&r1);
        let t2 = t0.sub(&quot.mul(&t1));
        r0 = r1;
        r1 = rem;
        t0 = t1;
        t1 = t2;
    }
    match r0.degree() {
        Some(0) => {
            let c = r0.leading().unwrap().recip();
            Ok(t0.scale(&c).rem(&modulus))
        }
        Some(d) => Err(AlgebraError::NotIrreducible { factor_degree: d }),
        None => unreachable!("gcd of non-zero polynomials is non-zero"),
    }
}

/// The number field ℚ[x]/(p) with elements stored as reduced rational polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberField {
    modulus: IntPolynomial,
    modulus_q: RatPolynomial,
}

impl NumberField {
    pub fn new(modulus: IntPolynomial) -> Result<Self, AlgebraError> {
        if !modulus.is_monic() {
            return Err(AlgebraError::NonMonic);
        }
        if modulus.degree() == 0 {
            return Err(AlgebraError::ConstantPolynomial);
        }
        let modulus_q = modulus.to_rational();
        Ok(NumberField { modulus, modulus_q })
    }

    pub fn modulus(&self) -> &IntPolynomial {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree()
    }

    pub fn reduce(&self, a: &RatPolynomial) -> RatPolynomial {
        a.rem(&self.modulus_q)
    }

    pub fn add(&self, a: &RatPolynomial, b: &RatPolynomial) -> RatPolynomial {
        a.add(b)
    }

    pub fn sub(&self, a: &RatPolynomial, b: &RatPolynomial) -> RatPolynomial {
        a.sub(b)
    }

    pub fn mul(&self, a: &RatPolynomial, b: &RatPolynomial) -> RatPolynomial {
        self.reduce(&a.mul(b))
    }

    /// Multiplication by the generator `x`, i.e. by the expansion eigenvalue.
    pub fn mul_x(&self, a: &RatPolynomial) -> RatPolynomial {
        self.reduce(&a.mul(&RatPolynomial::monomial(1)))
    }

    pub fn inv(&self, a: &RatPolynomial) -> Result<RatPolynomial, AlgebraError> {
        field_inverse(a, &self.modulus)
    }

    /// Dense coordinate vector `[c_0, …, c_{n-1}]` of a reduced element.
    pub fn coords(&self, a: &RatPolynomial) -> Vec<BigRational> {
        (0..self.degree()).map(|k| a.coeff(k)).collect()
    }

    pub fn from_coords(&self, c: &[BigRational]) -> RatPolynomial {
        self.reduce(&RatPolynomial::new(c.to_vec()))
    }

    pub fn is_zero(&self, a: &RatPolynomial) -> bool {
        a.is_zero()
    }

    pub fn one(&self) -> RatPolynomial {
        RatPolynomial::constant(BigRational::one())
    }

    pub fn zero(&self) -> RatPolynomial {
        RatPolynomial::constant(BigRational::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn roundtrip_is_exact(q: &RatPolynomial, p: &IntPolynomial, h: &RatPolynomial) -> bool {
        let prod = q.mul(h).sub(&RatPolynomial::one());
        prod.rem(&p.to_rational()).is_zero()
    }

    #[test]
    fn inverse_of_x_mod_golden() {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        let x = RatPolynomial::from_i64(&[0, 1]);
        let h = field_inverse(&x, &p).unwrap();
        assert_eq!(h, RatPolynomial::from_i64(&[-1, 1]));
        assert!(roundtrip_is_exact(&x, &p, &h));
    }

    #[test]
    fn inverse_of_x_mod_cubic() {
        let p = IntPolynomial::from_i64(&[3, -4, -1, 1]).unwrap();
        let x = RatPolynomial::from_i64(&[0, 1]);
        let h = field_inverse(&x, &p).unwrap();
        // (x^2 - x - 4) / (-3)
        assert_eq!(h, RatPolynomial::new(vec![q(4, 3), q(1, 3), q(-1, 3)]));
        assert!(roundtrip_is_exact(&x, &p, &h));
    }

    #[test]
    fn inverse_of_one() {
        let p = IntPolynomial::from_i64(&[3, -4, -1, 1]).unwrap();
        assert_eq!(field_inverse(&RatPolynomial::one(), &p).unwrap(), RatPolynomial::one());
    }

    #[test]
    fn zero_and_reducible_moduli() {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        let err = field_inverse(&RatPolynomial::from_i64(&[1, 1, -1]), &p).unwrap_err();
        assert!(matches!(err, AlgebraError::NotInvertible));
        // (x-1)(x+1): x-1 shares a factor
        let red = IntPolynomial::from_i64(&[-1, 0, 1]).unwrap();
        let err = field_inverse(&RatPolynomial::from_i64(&[-1, 1]), &red).unwrap_err();
        assert!(matches!(err, AlgebraError::NotIrreducible { factor_degree: 1 }));
    }
}
