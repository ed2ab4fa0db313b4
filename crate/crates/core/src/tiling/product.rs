use super::{Prototile, SubstitutionRule, TilingError};
use crate::expansion::BlockVector;

/// Direct product: types are pairs `(i, i')` numbered `i·κ' + i'`, supports and
/// digits are Cartesian products, and the expansion is the block-diagonal join.
pub fn direct_product(a: &SubstitutionRule, b: &SubstitutionRule) -> Result<SubstitutionRule, TilingError> {
    let (ka, kb) = (a.kappa(), b.kappa());
    let kappa = ka * kb;
    let idx = |i: usize, i2: usize| i * kb + i2;

    let mut prototiles = Vec::with_capacity(kappa);
    for pa in a.prototiles() {
        for pb in b.prototiles() {
            prototiles.push(Prototile { label: prototiles.len() + 1, support: pa.support.product(&pb.support) });
        }
    }

    let mut digits = vec![vec![Vec::new(); kappa]; kappa];
    for i in 0..ka {
        for i2 in 0..kb {
            for j in 0..ka {
                for j2 in 0..kb {
                    let set: Vec<BlockVector> = a.digits()[i][j]
                        .iter()
                        .flat_map(|u| {
                            b.digits()[i2][j2]
                                .iter()
                                .map(move |v| BlockVector::from_iterator(u.len() + v.len(), u.iter().chain(v.iter()).copied()))
                        })
                        .collect();
                    digits[idx(i, i2)][idx(j, j2)] = set;
                }
            }
        }
    }

    let mut tile_map = Vec::with_capacity(kappa);
    for j in 0..ka {
        for j2 in 0..kb {
            let (ca, cb) = (a.designated(j), b.designated(j2));
            let t = idx(ca.label, cb.label);
            let before: usize = (0..t).map(|s| digits[s][idx(j, j2)].len()).sum();
            let width = b.digits()[cb.label][j2].len();
            tile_map.push(before + ca.digit * width + cb.digit);
        }
    }

    let expansion = a.expansion().join(b.expansion())?;
    SubstitutionRule::new(prototiles, digits, expansion, tile_map)
}

#[cfg(test)]
mod tests {
    use super::super::rule::tests::fib;
    use super::super::{TilingPatch, DEFAULT_TILE_CAP};
    use super::*;

    fn kron(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let (n, m) = (a.len(), b.len());
        let mut out = vec![vec![0; n * m]; n * m];
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn fib_squared_is_kronecker() {
        let f = fib();
        let p = direct_product(&f, &f).unwrap();
        assert_eq!(p.kappa(), 4);
        assert_eq!(p.substitution_matrix(), kron(&f.substitution_matrix(), &f.substitution_matrix()));
        assert_eq!(p.expansion().factors().len(), 1);
        assert_eq!(p.expansion().factors()[0].multiplicity(), 2);
        assert!(p.validate().valid);
        assert!(p.has_exact());
    }

    #[test]
    fn product_control_points_are_products() {
        let f = fib();
        let p = direct_product(&f, &f).unwrap();
        for j in 0..4 {
            let c = p.designated(j);
            let (ca, cb) = (f.designated(j / 2), f.designated(j % 2));
            assert_eq!(c.label, ca.label * 2 + cb.label);
            assert_eq!(c.offset[0], ca.offset[0]);
            assert_eq!(c.offset[1], cb.offset[0]);
        }
        let patch = p.expand(&TilingPatch::single(p.origin_tile(0)), 4, DEFAULT_TILE_CAP).unwrap();
        assert_eq!(patch.len(), 64);
    }

    #[test]
    fn trivial_factor_relabels() {
        let one = SubstitutionRule::from_json(
            r#"{"prototiles":[{"label":1,"box":[[0,1]]}],"digits":{"1,1":[[0],[1]]},
                "expansion":{"min_poly":["-2","1"],"real_blocks":[2]},"tile_map":[0]}"#,
        )
        .unwrap();
        let f = fib();
        let p = direct_product(&f, &one).unwrap();
        assert_eq!(p.kappa(), 2);
        let m = p.substitution_matrix();
        let mf = f.substitution_matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[i][j], 2 * mf[i][j]);
            }
        }
    }
}
