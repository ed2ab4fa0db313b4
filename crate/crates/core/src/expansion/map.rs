//! The expansion map in real canonical block form.
//!
//! One copy `ψ` acts on `ℝ^m`, `m = s + 2t`, as `diag(λ_1, …, λ_s, A_1, …, A_t)`
//! with `A_k = [[a_k, -b_k], [b_k, a_k]]`. The full map is `J` copies of `ψ` on
//! `ℝ^d = H_1 ⊕ … ⊕ H_J`, `d = J·m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ExpansionError;
use crate::algebra::{isolate_roots, IntPolynomial, NumberField, RootSet, SpectrumSelection};

pub type BlockVector = DVector<f64>;

/// Root-matching slack on top of the certified radius, for block values read from files.
pub const BLOCK_MATCH_TOL: f64 = 1e-7;

const ROOT_PRECISION: f64 = 1e-12;

/// Serialized form: `{"min_poly": [...], "real_blocks": [...], "complex_blocks": [[a, b], ...], "multiplicity": J}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSpec {
    pub min_poly: IntPolynomial,
    #[serde(default)]
    pub real_blocks: Vec<f64>,
    #[serde(default)]
    pub complex_blocks: Vec<[f64; 2]>,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone)]
pub struct ExpansionMap {
    min_poly: IntPolynomial,
    real_blocks: Vec<f64>,
    complex_blocks: Vec<(f64, f64)>,
    multiplicity: usize,
    selection: SpectrumSelection,
    field: NumberField,
}

impl ExpansionMap {
    /// Validates the blocks against the roots of `min_poly` and snaps each block
    /// value onto its certified root.
    pub fn new(
        min_poly: IntPolynomial,
        real_blocks: Vec<f64>,
        complex_blocks: Vec<(f64, f64)>,
        multiplicity: usize,
    ) -> Result<Self, ExpansionError> {
        if multiplicity == 0 {
            return Err(ExpansionError::InvalidMap("multiplicity must be positive".into()));
        }
        if real_blocks.is_empty() && complex_blocks.is_empty() {
            return Err(ExpansionError::InvalidMap("no blocks".into()));
        }
        let roots = isolate_roots(&min_poly, ROOT_PRECISION)?;
        let mut chosen = Vec::new();
        let mut snapped_real = Vec::with_capacity(real_blocks.len());
        for &lam in &real_blocks {
            let i = match_root(&roots, Complex64::new(lam, 0.0))?;
            if !roots.roots[i].is_real() {
                return Err(ExpansionError::InvalidMap(format!("real block {lam} matches a non-real root")));
            }
            chosen.push(i);
            snapped_real.push(roots.roots[i].value.re);
        }
        let mut snapped_complex = Vec::with_capacity(complex_blocks.len());
        for &(a, b) in &complex_blocks {
            if b == 0.0 {
                return Err(ExpansionError::InvalidMap("complex block with b = 0".into()));
            }
            let i = match_root(&roots, Complex64::new(a, b))?;
            let j = roots.pairing[i].ok_or_else(|| {
                ExpansionError::InvalidMap(format!("complex block ({a}, {b}) matches a real root"))
            })?;
            chosen.push(i);
            chosen.push(j);
            let v = roots.roots[i].value;
            snapped_complex.push((v.re, v.im));
        }
        let mut dedup = chosen.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != chosen.len() {
            return Err(ExpansionError::InvalidMap("a root appears in two blocks of one copy".into()));
        }
        let selection = SpectrumSelection::new(min_poly.clone(), roots, chosen, multiplicity)?;
        if !selection.is_expanding() {
            return Err(ExpansionError::NotExpanding);
        }
        let field = NumberField::new(min_poly.clone())?;
        Ok(ExpansionMap {
            min_poly,
            real_blocks: snapped_real,
            complex_blocks: snapped_complex,
            multiplicity,
            selection,
            field,
        })
    }

    pub fn from_spec(spec: &ExpansionSpec) -> Result<Self, ExpansionError> {
        Self::new(
            spec.min_poly.clone(),
            spec.real_blocks.clone(),
            spec.complex_blocks.iter().map(|c| (c[0], c[1])).collect(),
            spec.multiplicity,
        )
    }

    pub fn to_spec(&self) -> ExpansionSpec {
        ExpansionSpec {
            min_poly: self.min_poly.clone(),
            real_blocks: self.real_blocks.clone(),
            complex_blocks: self.complex_blocks.iter().map(|&(a, b)| [a, b]).collect(),
            multiplicity: self.multiplicity,
        }
    }

    /// Same blocks, different number of copies.
    pub fn with_multiplicity(&self, multiplicity: usize) -> Result<Self, ExpansionError> {
        Self::new(
            self.min_poly.clone(),
            self.real_blocks.clone(),
            self.complex_blocks.clone(),
            multiplicity,
        )
    }

    /// Two maps have the same single-copy block `ψ`.
    pub fn same_block(&self, other: &ExpansionMap) -> bool {
        self.min_poly == other.min_poly
            && self.real_blocks == other.real_blocks
            && self.complex_blocks == other.complex_blocks
    }

    pub fn min_poly(&self) -> &IntPolynomial {
        &self.min_poly
    }

    pub fn selection(&self) -> &SpectrumSelection {
        &self.selection
    }

    pub fn roots(&self) -> &RootSet {
        self.selection.roots()
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn real_blocks(&self) -> &[f64] {
        &self.real_blocks
    }

    pub fn complex_blocks(&self) -> &[(f64, f64)] {
        &self.complex_blocks
    }

    pub fn s(&self) -> usize {
        self.real_blocks.len()
    }

    pub fn t(&self) -> usize {
        self.complex_blocks.len()
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// Size of one copy `ψ`.
    pub fn m(&self) -> usize {
        self.s() + 2 * self.t()
    }

    pub fn dim(&self) -> usize {
        self.multiplicity * self.m()
    }

    /// Diagonal of `D`: `λ_1, …, λ_s, λ_{s+1}, conj(λ_{s+1}), …`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.real_blocks.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        for &(a, b) in &self.complex_blocks {
            out.push(Complex64::new(a, b));
            out.push(Complex64::new(a, -b));
        }
        out
    }

    pub fn min_modulus(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coordinate ranges `(start, len)` of the sub-blocks `E_jk` inside `ℝ^d`.
    pub fn sub_blocks(&self) -> Vec<(usize, usize)> {
        let m = self.m();
        let mut out = Vec::with_capacity(self.multiplicity * (self.s() + self.t()));
        for j in 0..self.multiplicity {
            let base = j * m;
            for k in 0..self.s() {
                out.push((base + k, 1));
            }
            for k in 0..self.t() {
                out.push((base + self.s() + 2 * k, 2));
            }
        }
        out
    }

    /// The slice `x_jk` (zero-based `j`, `k` in `0..s+t`).
    pub fn sub_block<'a>(&self, x: &'a BlockVector, j: usize, k: usize) -> &'a [f64] {
        let base = j * self.m();
        let (start, len) = if k < self.s() { (base + k, 1) } else { (base + self.s() + 2 * (k - self.s()), 2) };
        &x.as_slice()[start..start + len]
    }

    fn check_dim(&self, x: &BlockVector) -> Result<(), ExpansionError> {
        if x.len() != self.dim() {
            return Err(ExpansionError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    fn blockwise(&self, x: &BlockVector, real: impl Fn(f64) -> f64, cplx: impl Fn(f64, f64) -> (f64, f64, f64, f64)) -> BlockVector {
        let mut y = x.clone();
        let (s, m) = (self.s(), self.m());
        for j in 0..self.multiplicity {
            let base = j * m;
            for (k, &lam) in self.real_blocks.iter().enumerate() {
                y[base + k] = real(lam) * x[base + k];
            }
            for (k, &(a, b)) in self.complex_blocks.iter().enumerate() {
                let i = base + s + 2 * k;
                let (m00, m01, m10, m11) = cplx(a, b);
                y[i] = m00 * x[i] + m01 * x[i + 1];
                y[i + 1] = m10 * x[i] + m11 * x[i + 1];
            }
        }
        y
    }

    pub fn apply(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.check_dim(x)?;
        Ok(self.blockwise(x, |l| l, |a, b| (a, -b, b, a)))
    }

    pub fn apply_transpose(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.check_dim(x)?;
        Ok(self.blockwise(x, |l| l, |a, b| (a, b, -b, a)))
    }

    pub fn apply_inverse(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.check_dim(x)?;
        Ok(self.blockwise(
            x,
            |l| 1.0 / l,
            |a, b| {
                let r = a * a + b * b;
                (a / r, b / r, -b / r, a / r)
            },
        ))
    }

    pub fn apply_inverse_transpose(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.check_dim(x)?;
        Ok(self.blockwise(
            x,
            |l| 1.0 / l,
            |a, b| {
                let r = a * a + b * b;
                (a / r, -b / r, b / r, a / r)
            },
        ))
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for c in 0..d {
            let mut e = DVector::zeros(d);
            e[c] = 1.0;
            m.set_column(c, &self.blockwise(&e, |l| l, |a, b| (a, -b, b, a)));
        }
        m
    }

    /// `‖x‖ = max_{j,k} ‖x_jk‖`.
    pub fn block_norm(&self, x: &BlockVector) -> Result<f64, ExpansionError> {
        self.check_dim(x)?;
        Ok(self
            .sub_blocks()
            .iter()
            .map(|&(start, len)| x.rows(start, len).norm())
            .fold(0.0, f64::max))
    }

    /// `P_j` (zero-based `j`): keeps `H_j`, zeroes everything else.
    pub fn project(&self, x: &BlockVector, j: usize) -> Result<BlockVector, ExpansionError> {
        self.check_dim(x)?;
        if j >= self.multiplicity {
            return Err(ExpansionError::IndexOutOfRange { index: j, len: self.multiplicity });
        }
        let m = self.m();
        let mut y = DVector::zeros(x.len());
        y.rows_mut(j * m, m).copy_from(&x.rows(j * m, m));
        Ok(y)
    }

    /// Index `j` of the unique `H_j` holding all non-zero coordinates of `x`.
    pub fn single_block(&self, x: &BlockVector) -> Result<usize, ExpansionError> {
        self.check_dim(x)?;
        let m = self.m();
        let occupied: Vec<usize> = (0..self.multiplicity)
            .filter(|&j| x.rows(j * m, m).iter().any(|v| *v != 0.0))
            .collect();
        match occupied.as_slice() {
            [] => Ok(0),
            [j] => Ok(*j),
            _ => Err(ExpansionError::NotInSingleBlock),
        }
    }
}

fn match_root(roots: &RootSet, z: Complex64) -> Result<usize, ExpansionError> {
    roots.find(z, BLOCK_MATCH_TOL).ok_or(ExpansionError::NotARoot { re: z.re, im: z.im })
}

/// Block-diagonal join of expansion maps with (possibly) different minimal
/// polynomials, as produced by direct products of tilings.
#[derive(Debug, Clone)]
pub struct Expansion {
    factors: Vec<ExpansionMap>,
    offsets: Vec<usize>,
}

impl Expansion {
    pub fn new(factors: Vec<ExpansionMap>) -> Result<Self, ExpansionError> {
        if factors.is_empty() {
            return Err(ExpansionError::InvalidMap("expansion has no factors".into()));
        }
        let mut offsets = Vec::with_capacity(factors.len());
        let mut acc = 0;
        for f in &factors {
            offsets.push(acc);
            acc += f.dim();
        }
        Ok(Expansion { factors, offsets })
    }

    pub fn single(map: ExpansionMap) -> Self {
        Expansion { factors: vec![map], offsets: vec![0] }
    }

    /// Joins two expansions; adjacent factors with the same block merge into
    /// one factor with summed multiplicity.
    pub fn join(&self, other: &Expansion) -> Result<Expansion, ExpansionError> {
        let mut factors = self.factors.clone();
        for f in &other.factors {
            match factors.last_mut() {
                Some(last) if last.same_block(f) => {
                    *last = last.with_multiplicity(last.multiplicity() + f.multiplicity())?;
                }
                _ => factors.push(f.clone()),
            }
        }
        Expansion::new(factors)
    }

    pub fn factors(&self) -> &[ExpansionMap] {
        &self.factors
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn as_single(&self) -> Option<&ExpansionMap> {
        match self.factors.as_slice() {
            [f] => Some(f),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(ExpansionMap::dim).sum()
    }

    pub fn min_modulus(&self) -> f64 {
        self.factors.iter().map(ExpansionMap::min_modulus).fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.factors.iter().map(ExpansionMap::max_modulus).fold(0.0, f64::max)
    }

    /// |det φ|
    pub fn abs_det(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.eigenvalues().iter().map(|z| z.norm()).product::<f64>().powi(f.multiplicity() as i32))
            .product()
    }

    pub fn factor_part(&self, x: &BlockVector, f: usize) -> BlockVector {
        x.rows(self.offsets[f], self.factors[f].dim()).into_owned()
    }

    /// Embeds a factor-local vector into `ℝ^d` with zeros elsewhere.
    pub fn embed_factor(&self, x: &BlockVector, f: usize) -> BlockVector {
        let mut y = DVector::zeros(self.dim());
        y.rows_mut(self.offsets[f], self.factors[f].dim()).copy_from(x);
        y
    }

    fn check_dim(&self, x: &BlockVector) -> Result<(), ExpansionError> {
        if x.len() != self.dim() {
            return Err(ExpansionError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    fn per_factor(
        &self,
        x: &BlockVector,
        op: impl Fn(&ExpansionMap, &BlockVector) -> Result<BlockVector, ExpansionError>,
    ) -> Result<BlockVector, ExpansionError> {
        self.check_dim(x)?;
        let mut y = DVector::zeros(x.len());
        for (f, map) in self.factors.iter().enumerate() {
            let part = op(map, &self.factor_part(x, f))?;
            y.rows_mut(self.offsets[f], map.dim()).copy_from(&part);
        }
        Ok(y)
    }

    pub fn apply(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.per_factor(x, ExpansionMap::apply)
    }

    pub fn apply_transpose(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.per_factor(x, ExpansionMap::apply_transpose)
    }

    pub fn apply_inverse(&self, x: &BlockVector) -> Result<BlockVector, ExpansionError> {
        self.per_factor(x, ExpansionMap::apply_inverse)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (f, map) in self.factors.iter().enumerate() {
            let o = self.offsets[f];
            m.view_mut((o, o), (map.dim(), map.dim())).copy_from(&map.matrix());
        }
        m
    }

    pub fn block_norm(&self, x: &BlockVector) -> Result<f64, ExpansionError> {
        self.check_dim(x)?;
        let mut best: f64 = 0.0;
        for (f, map) in self.factors.iter().enumerate() {
            best = best.max(map.block_norm(&self.factor_part(x, f))?);
        }
        Ok(best)
    }

    pub fn to_specs(&self) -> Vec<ExpansionSpec> {
        self.factors.iter().map(ExpansionMap::to_spec).collect()
    }
}
