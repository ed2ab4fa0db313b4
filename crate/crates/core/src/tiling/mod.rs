//! Substitution rules, patch expansion, fixed points, control points, return
//! vectors, and the finite-window checks (primitivity, FLC, Meyer, validity).

mod analysis;
mod control;
mod geometry;
mod patch;
mod product;
mod render;
mod rule;

use thiserror::Error;

use crate::expansion::{ExpansionError, ModuleCoords};

pub use analysis::{flc_census, meyer_gap, meyer_gap_exact, periods, repetitivity_gap, return_vectors, ReturnVectorSet};
pub(crate) use analysis::center_and_radius;
pub use control::{ControlOffsets, ControlPoints};
pub use geometry::BoxSupport;
pub use patch::{Seed, Tile, TilingPatch, DEFAULT_TILE_CAP};
pub use product::direct_product;
pub use render::{patch_to_json, render_svg};
pub use rule::{
    is_primitive, Child, Prototile, RuleSpec, SubstitutionRule, ValidationReport, Violation, ViolationKind,
};

/// Exact position: module coordinates for each factor of the expansion.
pub type ExactPoint = Vec<ModuleCoords>;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("tile count {needed} exceeds the cap {cap}")]
    ResourceLimit { needed: usize, cap: usize },
    #[error("no fixed tile found for powers up to {max_power}")]
    NoSeedFound { max_power: usize },
    #[error("patch radius {radius} is below three times the window {window}")]
    WindowTooSmall { radius: f64, window: f64 },
    #[error("render needs dimension at most 2, got {dim}")]
    RenderUnsupported { dim: usize },
    #[error("index {index} out of range for {len} tiles")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty point set")]
    Empty,
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}
