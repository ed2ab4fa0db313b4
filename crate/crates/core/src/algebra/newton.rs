use num_bigint::BigInt;
use num_traits::Zero;

use super::{AlgebraError, IntPolynomial};

/// Power sums `p_1, …, p_{n_max}` of the roots of a monic polynomial, exactly,
/// by Newton's identities.
///
/// With `p(x) = x^d + c_{d-1} x^{d-1} + … + c_0`:
/// `p_k = -(c_{d-1} p_{k-1} + … + c_{d-k+1} p_1 + k c_{d-k})` for `k ≤ d`, and
/// `p_k = -(c_{d-1} p_{k-1} + … + c_0 p_{k-d})` beyond.
pub fn power_sums(poly: &IntPolynomial, n_max: usize) -> Result<Vec<BigInt>, AlgebraError> {
    if !poly.is_monic() {
        return Err(AlgebraError::NonMonic);
    }
    if n_max == 0 {
        return Err(AlgebraError::InvalidArgument("n_max must be at least 1".into()));
    }
    let d = poly.degree();
    let c = poly.coeffs();
    // sums[k] holds p_k; sums[0] is unused.
    let mut sums: Vec<BigInt> = vec![BigInt::zero(); n_max + 1];
    for k in 1..=n_max {
        let mut acc = BigInt::zero();
        for i in 1..k.min(d + 1) {
            acc += &c[d - i] * &sums[k - i];
        }
        if k <= d {
            acc += &c[d - k] * BigInt::from(k);
        }
        sums[k] = -acc;
    }
    sums.remove(0);
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn cubic_by_hand() {
        let p = IntPolynomial::from_i64(&[3, -4, -1, 1]).unwrap();
        assert_eq!(power_sums(&p, 3).unwrap(), ints(&[1, 9, 4]));
    }

    #[test]
    fn single_root_one() {
        let p = IntPolynomial::from_i64(&[-1, 1]).unwrap();
        assert_eq!(power_sums(&p, 3).unwrap(), ints(&[1, 1, 1]));
    }

    #[test]
    fn lucas_numbers() {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        assert_eq!(power_sums(&p, 4).unwrap(), ints(&[1, 3, 4, 7]));
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        assert!(power_sums(&p, 0).is_err());
        let np = IntPolynomial::from_i64(&[-1, 2]).unwrap();
        assert!(matches!(power_sums(&np, 2), Err(AlgebraError::NonMonic)));
    }
}
