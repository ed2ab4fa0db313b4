use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BoxSupport, ExactPoint, TilingError};
use crate::expansion::{BlockVector, Expansion, ExpansionMap, ExpansionSpec, RecoverySearch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototile {
    /// 1-based type index.
    pub label: usize,
    #[serde(rename = "box")]
    pub support: BoxSupport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpansionField {
    Single(ExpansionSpec),
    Product(Vec<ExpansionSpec>),
}

/// On-disk rule. `digits["i,j"]` lists the translations of type-`i` children
/// inside the inflated type-`j` tile; `tile_map[j]` is a 0-based index into the
/// children of type `j + 1`, ordered by (child type, digit order).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleSpec {
    pub prototiles: Vec<Prototile>,
    pub digits: BTreeMap<String, Vec<Vec<f64>>>,
    pub expansion: ExpansionField,
    pub tile_map: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Child {
    /// 0-based type of the child.
    pub label: usize,
    pub offset: BlockVector,
    pub exact: Option<ExactPoint>,
    /// Position inside `D_{label, parent}`.
    pub digit: usize,
}

#[derive(Debug, Clone)]
pub struct SubstitutionRule {
    prototiles: Vec<Prototile>,
    digits: Vec<Vec<Vec<BlockVector>>>,
    expansion: Expansion,
    tile_map: Vec<usize>,
    children: Vec<Vec<Child>>,
    exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    VolumeMismatch,
    NotContained,
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// 1-based parent label.
    pub parent: usize,
    /// (1-based child label, digit index).
    pub child: Option<(usize, usize)>,
    pub other: Option<(usize, usize)>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

const GEOMETRY_TOL: f64 = 1e-9;

impl SubstitutionRule {
    /// `digits[i][j]` is `D_ij`; labels are 0-based here.
    pub fn new(
        prototiles: Vec<Prototile>,
        digits: Vec<Vec<Vec<BlockVector>>>,
        expansion: Expansion,
        tile_map: Vec<usize>,
    ) -> Result<Self, TilingError> {
        let kappa = prototiles.len();
        if kappa == 0 {
            return Err(TilingError::InvalidRule("no prototiles".into()));
        }
        let d = expansion.dim();
        for (k, p) in prototiles.iter().enumerate() {
            if p.label != k + 1 {
                return Err(TilingError::InvalidRule(format!("labels must be 1..{kappa} in order")));
            }
            if p.support.dim() != d {
                return Err(TilingError::InvalidRule(format!(
                    "prototile {} has dimension {}, expansion has {d}",
                    p.label,
                    p.support.dim()
                )));
            }
        }
        if digits.len() != kappa || digits.iter().any(|row| row.len() != kappa) {
            return Err(TilingError::InvalidRule("digit table must be κ×κ".into()));
        }
        if digits.iter().flatten().flatten().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
            return Err(TilingError::InvalidRule(format!("every digit needs {d} finite coordinates")));
        }
        if tile_map.len() != kappa {
            return Err(TilingError::InvalidRule("tile_map needs one entry per type".into()));
        }

        let search = RecoverySearch::default();
        let mut exact = true;
        let mut children = Vec::with_capacity(kappa);
        for j in 0..kappa {
            let mut list = Vec::new();
            for (i, row) in digits.iter().enumerate() {
                for (k, u) in row[j].iter().enumerate() {
                    let coords = if exact { recover_exact(&expansion, u, &search) } else { None };
                    exact &= coords.is_some();
                    list.push(Child { label: i, offset: u.clone(), exact: coords, digit: k });
                }
            }
            if list.is_empty() {
                return Err(TilingError::InvalidRule(format!("type {} has no children", j + 1)));
            }
            if tile_map[j] >= list.len() {
                return Err(TilingError::InvalidRule(format!(
                    "tile_map[{j}] = {} but type {} has {} children",
                    tile_map[j],
                    j + 1,
                    list.len()
                )));
            }
            children.push(list);
        }
        if !exact {
            children.iter_mut().flatten().for_each(|c| c.exact = None);
        }
        Ok(SubstitutionRule { prototiles, digits, expansion, tile_map, children, exact })
    }

    pub fn from_spec(spec: &RuleSpec) -> Result<Self, TilingError> {
        let mut prototiles = spec.prototiles.clone();
        prototiles.sort_by_key(|p| p.label);
        let kappa = prototiles.len();
        let expansion = match &spec.expansion {
            ExpansionField::Single(s) => Expansion::single(ExpansionMap::from_spec(s)?),
            ExpansionField::Product(list) => {
                let maps = list.iter().map(ExpansionMap::from_spec).collect::<Result<Vec<_>, _>>()?;
                let mut it = maps.into_iter();
                let first = it.next().ok_or_else(|| TilingError::InvalidRule("empty expansion list".into()))?;
                let mut e = Expansion::single(first);
                for m in it {
                    e = e.join(&Expansion::single(m))?;
                }
                e
            }
        };
        let mut digits = vec![vec![Vec::new(); kappa]; kappa];
        for (key, vs) in &spec.digits {
            let (i, j) = parse_key(key, kappa)?;
            digits[i][j] = vs.iter().map(|v| BlockVector::from_column_slice(v)).collect();
        }
        SubstitutionRule::new(prototiles, digits, expansion, spec.tile_map.clone())
    }

    pub fn from_json(text: &str) -> Result<Self, TilingError> {
        let spec: RuleSpec = serde_json::from_str(text).map_err(|e| TilingError::Parse(e.to_string()))?;
        SubstitutionRule::from_spec(&spec)
    }

    pub fn to_spec(&self) -> RuleSpec {
        let mut digits = BTreeMap::new();
        for (i, row) in self.digits.iter().enumerate() {
            for (j, set) in row.iter().enumerate() {
                if !set.is_empty() {
                    digits.insert(format!("{},{}", i + 1, j + 1), set.iter().map(|v| v.iter().copied().collect()).collect());
                }
            }
        }
        let specs = self.expansion.to_specs();
        let expansion = if specs.len() == 1 {
            ExpansionField::Single(specs.into_iter().next().expect("one factor"))
        } else {
            ExpansionField::Product(specs)
        };
        RuleSpec { prototiles: self.prototiles.clone(), digits, expansion, tile_map: self.tile_map.clone() }
    }

    pub fn kappa(&self) -> usize {
        self.prototiles.len()
    }

    pub fn dim(&self) -> usize {
        self.expansion.dim()
    }

    pub fn prototiles(&self) -> &[Prototile] {
        &self.prototiles
    }

    pub fn digits(&self) -> &[Vec<Vec<BlockVector>>] {
        &self.digits
    }

    pub fn expansion(&self) -> &Expansion {
        &self.expansion
    }

    pub fn tile_map(&self) -> &[usize] {
        &self.tile_map
    }

    /// Children of type `j` (0-based), ordered by (child type, digit order).
    pub fn children(&self, j: usize) -> &[Child] {
        &self.children[j]
    }

    /// The designated child `γ(T_j)`.
    pub fn designated(&self, j: usize) -> &Child {
        &self.children[j][self.tile_map[j]]
    }

    /// Whether every digit has exact module coordinates.
    pub fn has_exact(&self) -> bool {
        self.exact
    }

    /// `M[i][j] = #D_ij`.
    pub fn substitution_matrix(&self) -> Vec<Vec<u64>> {
        self.digits.iter().map(|row| row.iter().map(|s| s.len() as u64).collect()).collect()
    }

    pub fn is_primitive(&self) -> bool {
        is_primitive(&self.substitution_matrix())
    }

    /// Checks the volume identity, containment of every child in `φA_j`, and
    /// pairwise interior-disjointness of the children. Never fails.
    pub fn validate(&self) -> ValidationReport {
        let det = self.expansion.abs_det();
        let mut violations = Vec::new();
        for j in 0..self.kappa() {
            let parent = &self.prototiles[j].support;
            let lhs = det * parent.volume();
            let rhs: f64 = self.children[j].iter().map(|c| self.prototiles[c.label].support.volume()).sum();
            if (lhs - rhs).abs() > GEOMETRY_TOL * lhs.abs().max(rhs.abs()) {
                violations.push(Violation {
                    kind: ViolationKind::VolumeMismatch,
                    parent: j + 1,
                    child: None,
                    other: None,
                    detail: format!("|det φ|·vol = {lhs}, children sum to {rhs}"),
                });
            }
            let tol = GEOMETRY_TOL * (1.0 + parent.diameter() * det);
            let boxes: Vec<BoxSupport> =
                self.children[j].iter().map(|c| self.prototiles[c.label].support.translate(&c.offset)).collect();
            for (c, b) in self.children[j].iter().zip(&boxes) {
                let inside = b.corners().iter().all(|corner| {
                    self.expansion
                        .apply_inverse(corner)
                        .map(|pre| parent.contains(&pre, tol))
                        .unwrap_or(false)
                });
                if !inside {
                    violations.push(Violation {
                        kind: ViolationKind::NotContained,
                        parent: j + 1,
                        child: Some((c.label + 1, c.digit)),
                        other: None,
                        detail: format!("offset {:?} leaves φA_{}", c.offset.as_slice(), j + 1),
                    });
                }
            }
            for a in 0..boxes.len() {
                for b in a + 1..boxes.len() {
                    if !boxes[a].interior_disjoint(&boxes[b], tol) {
                        let (ca, cb) = (&self.children[j][a], &self.children[j][b]);
                        violations.push(Violation {
                            kind: ViolationKind::Overlap,
                            parent: j + 1,
                            child: Some((ca.label + 1, ca.digit)),
                            other: Some((cb.label + 1, cb.digit)),
                            detail: "children overlap".into(),
                        });
                    }
                }
            }
        }
        ValidationReport { valid: violations.is_empty(), violations }
    }
}

fn parse_key(key: &str, kappa: usize) -> Result<(usize, usize), TilingError> {
    let bad = || TilingError::Parse(format!("digit key {key:?} is not \"i,j\" with labels in 1..={kappa}"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 || i > kappa || j > kappa {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

fn recover_exact(expansion: &Expansion, u: &BlockVector, search: &RecoverySearch) -> Option<ExactPoint> {
    expansion
        .factors()
        .iter()
        .enumerate()
        .map(|(f, map)| map.recover_module(&expansion.factor_part(u, f), search).ok())
        .collect()
}

/// Primitive iff some power up to Wielandt's bound `κ² − 2κ + 2` is strictly positive.
pub fn is_primitive(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    let a: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let mut p = a.clone();
    let bound = (n * n).saturating_sub(2 * n) + 2;
    for _ in 0..bound {
        if p.iter().flatten().all(|&x| x) {
            return true;
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).any(|k| p[i][k] && a[k][j]);
            }
        }
        p = next;
    }
    p.iter().flatten().all(|&x| x)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const PHI: f64 = 1.618033988749895;

    pub(crate) fn fib_json(len_a: f64, len_b: f64) -> String {
        format!(
            r#"{{"prototiles":[{{"label":1,"box":[[0,{len_a}]]}},{{"label":2,"box":[[0,{len_b}]]}}],
               "digits":{{"1,1":[[0]],"2,1":[[{len_a}]],"1,2":[[0]]}},
               "expansion":{{"min_poly":["-1","-1","1"],"real_blocks":[{PHI}]}},
               "tile_map":[0,0]}}"#
        )
    }

    pub(crate) fn fib() -> SubstitutionRule {
        SubstitutionRule::from_json(&fib_json(1.0, 1.0 / PHI)).unwrap()
    }

    #[test]
    fn fibonacci_matrix_and_children() {
        let r = fib();
        assert_eq!(r.substitution_matrix(), vec![vec![1, 1], vec![1, 0]]);
        assert!(r.is_primitive());
        assert!(r.has_exact());
        let kids: Vec<(usize, f64)> = r.children(0).iter().map(|c| (c.label, c.offset[0])).collect();
        assert_eq!(kids, vec![(0, 0.0), (1, 1.0)]);
        assert!(r.validate().valid);
    }

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(&[vec![1]]));
        assert!(!is_primitive(&[vec![2, 0], vec![0, 2]]));
        assert!(!is_primitive(&[vec![0, 1], vec![1, 0]]));
        // Wielandt's extremal matrix needs exactly κ² − 2κ + 2 steps.
        let w = vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 0]];
        assert!(is_primitive(&w));
    }

    #[test]
    fn validation_reports() {
        let ok = SubstitutionRule::from_json(&fib_json(PHI, 1.0)).unwrap();
        assert!(ok.validate().valid);
        let bad = SubstitutionRule::from_json(&fib_json(1.0, 1.0)).unwrap();
        let rep = bad.validate();
        assert!(!rep.valid);
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::VolumeMismatch));
        let overlap = fib_json(1.0, 1.0 / PHI).replace(r#""1,1":[[0]]"#, r#""1,1":[[0],[0.5]]"#);
        let rep = SubstitutionRule::from_json(&overlap).unwrap().validate();
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::Overlap));
    }

    #[test]
    fn structural_errors() {
        let j = fib_json(1.0, 1.0 / PHI);
        assert!(matches!(SubstitutionRule::from_json("{"), Err(TilingError::Parse(_))));
        let bad_map = j.replace(r#""tile_map":[0,0]"#, r#""tile_map":[0,3]"#);
        assert!(matches!(SubstitutionRule::from_json(&bad_map), Err(TilingError::InvalidRule(_))));
        let bad_key = j.replace(r#""1,2""#, r#""1,7""#);
        assert!(matches!(SubstitutionRule::from_json(&bad_key), Err(TilingError::Parse(_))));
    }

    #[test]
    fn spec_roundtrip() {
        let r = fib();
        let text = serde_json::to_string(&r.to_spec()).unwrap();
        let back = SubstitutionRule::from_json(&text).unwrap();
        assert_eq!(back.substitution_matrix(), r.substitution_matrix());
        assert_eq!(back.prototiles(), r.prototiles());
    }
}
