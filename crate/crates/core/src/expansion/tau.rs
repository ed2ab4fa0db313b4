//! The change of basis `τ` with `τ(φ^k y_j) = φ^k α_j`.

use nalgebra::DMatrix;

use super::{BlockVector, ExpansionError, ExpansionMap, ModuleCoords};
use crate::algebra::{NumberField, RatPolynomial};

pub const DEFAULT_ANGULAR_TOL: f64 = 0.1;
pub const DEFAULT_F_TOL: f64 = 1e-6;

const DET_TOL: f64 = 1e-10;

/// Square matrix over `ℚ[x]/(p)`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    pub rows: Vec<Vec<RatPolynomial>>,
}

impl FieldMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { RatPolynomial::one() } else { RatPolynomial::zero() }).collect())
            .collect();
        FieldMatrix { rows }
    }

    /// Columns are the given module coordinates.
    pub fn from_columns(cols: &[ModuleCoords]) -> Self {
        let n = cols.len();
        let rows = (0..n).map(|i| cols.iter().map(|c| c.0[i].clone()).collect()).collect();
        FieldMatrix { rows }
    }

    pub fn apply(&self, field: &NumberField, u: &ModuleCoords) -> ModuleCoords {
        ModuleCoords(
            self.rows
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&u.0)
                        .fold(RatPolynomial::zero(), |acc, (a, b)| acc.add(&field.mul(a, b)))
                })
                .collect(),
        )
    }

    /// Gauss-Jordan elimination over the field.
    pub fn inverse(&self, field: &NumberField) -> Result<FieldMatrix, ExpansionError> {
        let n = self.size();
        let mut a = self.rows.clone();
        let mut inv = FieldMatrix::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !field.is_zero(&a[r][col]))
                .ok_or(ExpansionError::DegenerateBasis { determinant: 0.0 })?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p_inv = field.inv(&a[col][col])?;
            for k in 0..n {
                a[col][k] = field.mul(&a[col][k], &p_inv);
                inv[col][k] = field.mul(&inv[col][k], &p_inv);
            }
            for r in 0..n {
                if r == col || field.is_zero(&a[r][col]) {
                    continue;
                }
                let f = a[r][col].clone();
                for k in 0..n {
                    let t = field.mul(&f, &a[col][k]);
                    a[r][k] = a[r][k].sub(&t);
                    let t = field.mul(&f, &inv[col][k]);
                    inv[r][k] = inv[r][k].sub(&t);
                }
            }
        }
        Ok(FieldMatrix { rows: inv })
    }
}

#[derive(Debug, Clone)]
pub struct TauFit {
    /// Real `d×d` matrix of `τ`.
    pub matrix: DMatrix<f64>,
    /// `τ` on module coordinates, when the `y_j` were given exactly.
    pub exact: Option<FieldMatrix>,
    pub y_points: Vec<BlockVector>,
    /// Determinant of the Krylov basis `{φ^k y_j}` with unit columns.
    pub determinant: f64,
}

impl TauFit {
    pub fn apply(&self, x: &BlockVector) -> BlockVector {
        &self.matrix * x
    }
}

impl ExpansionMap {
    /// Fits `τ` from `J` points; `τ = W_α W_y⁻¹` with `W` the Krylov matrices.
    pub fn fit_tau(&self, y_points: &[BlockVector]) -> Result<TauFit, ExpansionError> {
        if y_points.len() != self.multiplicity() {
            return Err(ExpansionError::DimensionMismatch { expected: self.multiplicity(), got: y_points.len() });
        }
        let wy = self.krylov_matrix(y_points)?;
        let mut unit = wy.clone();
        for mut c in unit.column_iter_mut() {
            let n = c.norm();
            if n > 0.0 {
                c /= n;
            }
        }
        let determinant = unit.determinant();
        if !determinant.is_finite() || determinant.abs() < DET_TOL {
            return Err(ExpansionError::DegenerateBasis { determinant });
        }
        let wy_inv = wy.try_inverse().ok_or(ExpansionError::DegenerateBasis { determinant })?;
        let wa = self.krylov_matrix(&self.alpha_vectors())?;
        Ok(TauFit { matrix: wa * wy_inv, exact: None, y_points: y_points.to_vec(), determinant })
    }

    /// As [`fit_tau`](Self::fit_tau), also inverting the module-coordinate matrix of the `y_j`.
    pub fn fit_tau_exact(&self, y: &[ModuleCoords]) -> Result<TauFit, ExpansionError> {
        let points: Vec<BlockVector> = y.iter().map(|c| self.embed(c)).collect();
        let mut fit = self.fit_tau(&points)?;
        fit.exact = Some(FieldMatrix::from_columns(y).inverse(self.field())?);
        Ok(fit)
    }

    /// Picks one candidate per `α_j`: scanning by increasing block norm, the first
    /// point whose direction is within `angular_tol` of `α_j` and whose `ℱ`-image
    /// on `H_j` has every coordinate above `f_tol` in modulus.
    pub fn select_basis_points(
        &self,
        candidates: &[BlockVector],
        angular_tol: f64,
        f_tol: f64,
    ) -> Result<Vec<usize>, ExpansionError> {
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
        for (i, c) in candidates.iter().enumerate() {
            let n = self.block_norm(c)?;
            if n > 0.0 {
                order.push((n, i));
            }
        }
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let alphas = self.alpha_vectors();
        let mut picked = Vec::with_capacity(alphas.len());
        for (j, alpha) in alphas.iter().enumerate() {
            let dir_a = alpha / alpha.norm();
            let hit = order.iter().find(|&&(_, i)| {
                let y = &candidates[i];
                let dir_y = y / y.norm();
                if (dir_y - &dir_a).norm() >= angular_tol {
                    return false;
                }
                let local = self.project(y, j).expect("index in range");
                let img = self.f_local(&local.as_slice()[j * self.m()..(j + 1) * self.m()]);
                img.iter().all(|z| z.norm() > f_tol)
            });
            match hit {
                Some(&(_, i)) => picked.push(i),
                None => return Err(ExpansionError::NoBasisPoint { index: j }),
            }
        }
        Ok(picked)
    }
}
