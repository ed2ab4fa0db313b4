use nalgebra::DMatrix;
use serde::Serialize;

use super::profile::{DecayProfile, ProfileVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Constructed { factor: usize, j: usize, l: usize, k: usize },
    Grid,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueCandidate {
    pub gamma: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub candidate: EigenvalueCandidate,
    pub profile: DecayProfile,
}

impl ReportEntry {
    pub fn accepted(&self) -> bool {
        self.profile.verdict == ProfileVerdict::Decays
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueReport {
    pub candidates: Vec<ReportEntry>,
    /// Dimension of the span of the accepted candidates.
    pub rank: usize,
    pub relatively_dense: bool,
}

impl EigenvalueReport {
    pub fn new(candidates: Vec<ReportEntry>, dim: usize) -> Self {
        let accepted: Vec<Vec<f64>> =
            candidates.iter().filter(|c| c.accepted()).map(|c| c.candidate.gamma.clone()).collect();
        let rank = span_rank(&accepted, dim);
        EigenvalueReport { candidates, rank, relatively_dense: rank == dim }
    }

    pub fn accepted(&self) -> impl Iterator<Item = &ReportEntry> {
        self.candidates.iter().filter(|c| c.accepted())
    }
}

/// Numerical rank of a set of vectors in `ℝ^dim` (relative tolerance `1e-8`).
pub fn span_rank(vectors: &[Vec<f64>], dim: usize) -> usize {
    let vs: Vec<&Vec<f64>> = vectors.iter().filter(|v| v.iter().any(|&x| x != 0.0)).collect();
    if vs.is_empty() || dim == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(dim, vs.len(), |i, j| vs[j][i]);
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-8 * top).count()
}
