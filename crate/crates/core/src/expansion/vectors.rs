//! The complex coordinates `ℱ` that diagonalize each copy of `ψ`, and the
//! `α_j` / `β_j` vectors built from them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{BlockVector, ExpansionError, ExpansionMap};

/// `ℱ(x)` for `x` in a single `H_j`: real slots unchanged, each complex pair
/// `(x_1, x_2)` sent to `((x_1 + i x_2)/√2, (x_1 − i x_2)/√2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FImage {
    pub block: usize,
    pub entries: Vec<Complex64>,
}

/// `⟨z, u⟩_ℂ = Σ z_k conj(u_k)`
pub fn complex_inner(z: &[Complex64], u: &[Complex64]) -> Complex64 {
    z.iter().zip(u).map(|(a, b)| a * b.conj()).sum()
}

/// Outcome of the Krylov-family independence test.
#[derive(Debug, Clone)]
pub struct VandermondeFamily {
    pub vectors: Vec<BlockVector>,
    pub determinant: f64,
    pub independent: bool,
}

impl ExpansionMap {
    /// `ℱ` on one copy `ℝ^m`.
    pub fn f_local(&self, x: &[f64]) -> Vec<Complex64> {
        let s = self.s();
        let mut out: Vec<Complex64> = x[..s].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for k in 0..self.t() {
            let (a, b) = (x[s + 2 * k], x[s + 2 * k + 1]);
            out.push(Complex64::new(a, b) / std::f64::consts::SQRT_2);
            out.push(Complex64::new(a, -b) / std::f64::consts::SQRT_2);
        }
        out
    }

    /// Inverse of [`f_local`](Self::f_local); only the first entry of each
    /// conjugate pair is read.
    pub fn f_local_inverse(&self, z: &[Complex64]) -> Vec<f64> {
        let s = self.s();
        let mut out: Vec<f64> = z[..s].iter().map(|v| v.re).collect();
        for k in 0..self.t() {
            let w = z[s + 2 * k] * std::f64::consts::SQRT_2;
            out.push(w.re);
            out.push(w.im);
        }
        out
    }

    pub fn f_transform(&self, x: &BlockVector) -> Result<FImage, ExpansionError> {
        let j = self.single_block(x)?;
        let m = self.m();
        Ok(FImage { block: j, entries: self.f_local(&x.as_slice()[j * m..(j + 1) * m]) })
    }

    pub fn f_inverse(&self, img: &FImage) -> Result<BlockVector, ExpansionError> {
        let m = self.m();
        if img.entries.len() != m {
            return Err(ExpansionError::DimensionMismatch { expected: m, got: img.entries.len() });
        }
        if img.block >= self.multiplicity() {
            return Err(ExpansionError::IndexOutOfRange { index: img.block, len: self.multiplicity() });
        }
        let mut x = DVector::zeros(self.dim());
        let local = self.f_local_inverse(&img.entries);
        x.rows_mut(img.block * m, m).copy_from_slice(&local);
        Ok(x)
    }

    /// `α_j`: ones on the coordinates of `H_j`, zeros elsewhere.
    pub fn alpha_vectors(&self) -> Vec<BlockVector> {
        let m = self.m();
        (0..self.multiplicity())
            .map(|j| DVector::from_fn(self.dim(), |n, _| if n / m == j { 1.0 } else { 0.0 }))
            .collect()
    }

    /// `β` with `ℱ(β)_k = conj(ℱ(α)_k)^{-1}`; fails if `ℱ(α)` has a zero entry.
    pub fn beta_from_alpha(&self, alpha: &BlockVector) -> Result<BlockVector, ExpansionError> {
        let fa = self.f_transform(alpha)?;
        if let Some(k) = fa.entries.iter().position(|z| z.norm() == 0.0) {
            return Err(ExpansionError::ZeroCoordinate { index: k });
        }
        let entries = fa.entries.iter().map(|z| z.conj().inv()).collect();
        self.f_inverse(&FImage { block: fa.block, entries })
    }

    pub fn beta_vectors(&self) -> Vec<BlockVector> {
        self.alpha_vectors()
            .iter()
            .map(|a| self.beta_from_alpha(a).expect("α_j has no zero F-coordinate"))
            .collect()
    }

    /// `{x, φx, …, φ^{m−1}x}` for `x` in one `H_j`, with the `m×m` determinant in `H_j` coordinates.
    pub fn vandermonde_family(&self, x: &BlockVector, tol: f64) -> Result<VandermondeFamily, ExpansionError> {
        let j = self.single_block(x)?;
        let m = self.m();
        let mut vectors = Vec::with_capacity(m);
        let mut cur = x.clone();
        for _ in 0..m {
            let next = self.apply(&cur)?;
            vectors.push(cur);
            cur = next;
        }
        let local = DMatrix::from_fn(m, m, |r, c| vectors[c][j * m + r]);
        let determinant = local.determinant();
        Ok(VandermondeFamily { vectors, determinant, independent: determinant.abs() > tol })
    }

    /// The `d×d` matrix whose columns are `φ^k α_j`, `0 ≤ k < m`, `j` outer.
    pub fn alpha_basis(&self) -> DMatrix<f64> {
        self.krylov_matrix(&self.alpha_vectors()).expect("α_j lie in H_j")
    }

    /// Columns `φ^k v_j` for `k < m`, one group per `v_j`.
    pub fn krylov_matrix(&self, vs: &[BlockVector]) -> Result<DMatrix<f64>, ExpansionError> {
        let d = self.dim();
        let m = self.m();
        let mut mat = DMatrix::zeros(d, vs.len() * m);
        for (j, v) in vs.iter().enumerate() {
            let mut cur = v.clone();
            for k in 0..m {
                let next = self.apply(&cur)?;
                mat.set_column(j * m + k, &cur);
                cur = next;
            }
        }
        Ok(mat)
    }

    /// Same with `φ^T`.
    pub fn krylov_matrix_transpose(&self, vs: &[BlockVector]) -> Result<DMatrix<f64>, ExpansionError> {
        let d = self.dim();
        let m = self.m();
        let mut mat = DMatrix::zeros(d, vs.len() * m);
        for (j, v) in vs.iter().enumerate() {
            let mut cur = v.clone();
            for k in 0..m {
                let next = self.apply_transpose(&cur)?;
                mat.set_column(j * m + k, &cur);
                cur = next;
            }
        }
        Ok(mat)
    }
}
