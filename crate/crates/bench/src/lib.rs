//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use pisotile::tiling::SubstitutionRule;

/// Loads a rule from the workspace `fixtures/` directory.
pub fn fixture(name: &str) -> SubstitutionRule {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    SubstitutionRule::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
