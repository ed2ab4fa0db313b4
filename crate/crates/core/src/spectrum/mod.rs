//! The eigenvalue criterion, the explicit eigenvalue family, relative-density
//! verdicts, and the weak-mixing probe.

mod family;
mod pairing;
mod probe;
mod profile;
mod report;
mod rho;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::expansion::ExpansionError;

pub use family::{construct_family, family_vectors, screen_family, ConstructedFamily, FamilyCandidate, Screen};
pub use pairing::{ExactForm, Member, PairingEngine, PreparedForm};
pub use probe::{pisot_decay_bound, profile_all, weak_mixing_probe, ExactBasis, GridSpec, ProbeEntry, ProbeReport};
pub use profile::{
    criterion_profile, criterion_profile_exact, DecayProfile, ProfileConfig, ProfileVerdict, OVERFLOW_GUARD,
};
pub use report::{span_rank, EigenvalueCandidate, EigenvalueReport, Provenance, ReportEntry};
pub use rho::{fit_rho, RhoFit, DEFAULT_DENOMINATOR_BOUND};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("no K up to {k_max} passes screening")]
    NoPassingK { k_max: usize },
    #[error("denominator reconstruction failed (worst residual {worst_residual:e})")]
    ReconstructionFailed { worst_residual: f64 },
    #[error("spectrum is not a Pisot family")]
    NotPisotFamily,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
