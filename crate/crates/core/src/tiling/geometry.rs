use serde::{Deserialize, Serialize};

use crate::expansion::BlockVector;

/// Axis-aligned box `∏ [lo_k, hi_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", try_from = "Vec<[f64; 2]>")]
pub struct BoxSupport {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSupport {
    pub fn new(intervals: &[[f64; 2]]) -> Option<Self> {
        if intervals.is_empty() || intervals.iter().any(|&[a, b]| !(a.is_finite() && b.is_finite() && a < b)) {
            return None;
        }
        Some(BoxSupport { lo: intervals.iter().map(|i| i[0]).collect(), hi: intervals.iter().map(|i| i[1]).collect() })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn translate(&self, v: &BlockVector) -> BoxSupport {
        BoxSupport {
            lo: self.lo.iter().zip(v.iter()).map(|(a, x)| a + x).collect(),
            hi: self.hi.iter().zip(v.iter()).map(|(a, x)| a + x).collect(),
        }
    }

    pub fn product(&self, other: &BoxSupport) -> BoxSupport {
        BoxSupport {
            lo: self.lo.iter().chain(&other.lo).copied().collect(),
            hi: self.hi.iter().chain(&other.hi).copied().collect(),
        }
    }

    pub fn corners(&self) -> Vec<BlockVector> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| BlockVector::from_fn(d, |k, _| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] }))
            .collect()
    }

    pub fn contains(&self, x: &BlockVector, tol: f64) -> bool {
        x.iter().enumerate().all(|(k, &v)| v >= self.lo[k] - tol && v <= self.hi[k] + tol)
    }

    /// Interiors are disjoint (up to `tol` of overlap on some axis).
    pub fn interior_disjoint(&self, other: &BoxSupport, tol: f64) -> bool {
        (0..self.dim()).any(|k| self.hi[k] <= other.lo[k] + tol || other.hi[k] <= self.lo[k] + tol)
    }

    pub fn center(&self) -> BlockVector {
        BlockVector::from_fn(self.dim(), |k, _| 0.5 * (self.lo[k] + self.hi[k]))
    }
}

impl From<BoxSupport> for Vec<[f64; 2]> {
    fn from(b: BoxSupport) -> Self {
        b.lo.iter().zip(&b.hi).map(|(&a, &c)| [a, c]).collect()
    }
}

impl TryFrom<Vec<[f64; 2]>> for BoxSupport {
    type Error = String;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self, String> {
        BoxSupport::new(&v).ok_or_else(|| "box needs non-empty intervals with lo < hi".to_string())
    }
}
