//! Property tests for decay profiles and the spectrum pipeline.

use std::path::PathBuf;

use nalgebra::{dvector, DVector};
use num_bigint::BigInt;
use proptest::prelude::*;

use pisotile::algebra::{IntPolynomial, Verdict};
use pisotile::expansion::{Expansion, ExpansionMap};
use pisotile::pipeline::{run_spectrum, SpectrumConfig};
use pisotile::spectrum::{
    criterion_profile, criterion_profile_exact, ExactForm, Member, PairingEngine, ProfileConfig, Provenance,
};
use pisotile::tiling::SubstitutionRule;

const PHI: f64 = 1.618033988749895;

fn golden() -> Expansion {
    let p = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
    Expansion::single(ExpansionMap::new(p, vec![PHI], vec![], 1).unwrap())
}

/// Golden rotation on the first axis, doubling on the second.
fn golden_and_double() -> Expansion {
    let two = IntPolynomial::from_i64(&[-2, 1]).unwrap();
    golden().join(&Expansion::single(ExpansionMap::new(two, vec![2.0], vec![], 1).unwrap())).unwrap()
}

fn sample_2d() -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec((-3i32..=3, -3i32..=3, -3i32..=3), 1..12).prop_map(|v| {
        v.into_iter().map(|(a, b, c)| dvector![a as f64 + b as f64 * PHI, c as f64]).collect()
    })
}

fn fixture(name: &str) -> SubstitutionRule {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    SubstitutionRule::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_wave_vector_has_zero_profile(xi in sample_2d()) {
        let p = criterion_profile(&golden_and_double(), &xi, &[], &dvector![0.0, 0.0], &ProfileConfig::default()).unwrap();
        prop_assert!(p.eps.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn eps_lies_in_unit_half_interval(xi in sample_2d(), g0 in -2.0f64..2.0, g1 in -2.0f64..2.0) {
        let cfg = ProfileConfig { n_max: 20, ..ProfileConfig::default() };
        let p = criterion_profile(&golden_and_double(), &xi, &[], &dvector![g0, g1], &cfg).unwrap();
        prop_assert!(p.eps.iter().all(|&e| (0.0..=0.5).contains(&e)));
    }

    /// Shifting γ by an integer on the doubling axis changes every pairing by an integer.
    #[test]
    fn integer_shift_on_module_axis_is_invisible(xi in sample_2d(), g0 in -2.0f64..2.0, g1 in -2.0f64..2.0, z in -3i32..=3) {
        let cfg = ProfileConfig { n_max: 20, ..ProfileConfig::default() };
        let phi = golden_and_double();
        let a = criterion_profile(&phi, &xi, &[], &dvector![g0, g1], &cfg).unwrap();
        let b = criterion_profile(&phi, &xi, &[], &dvector![g0, g1 + z as f64], &cfg).unwrap();
        for (x, y) in a.eps.iter().zip(&b.eps) {
            prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    /// The exact route agrees with double precision while the pairings are small.
    #[test]
    fn exact_and_float_profiles_agree(
        samples in prop::collection::vec((-5i64..=5, -5i64..=5), 1..8),
        shift in 0usize..3,
        num in -7i128..=7,
        den in 1i128..=6,
    ) {
        let coords = samples.iter().map(|&(a, b)| vec![vec![vec![BigInt::from(a), BigInt::from(b)]]]).collect();
        let engine = PairingEngine::new(&golden(), coords, 40).unwrap();
        let form = ExactForm { den, terms: vec![(Member { factor: 0, copy: 0, shift }, num)] };
        let xi: Vec<_> = samples.iter().map(|&(a, b)| dvector![a as f64 + b as f64 * PHI]).collect();
        let gamma = dvector![num as f64 / den as f64 * PHI.powi(shift as i32)];
        let cfg = ProfileConfig { n_max: 12, ..ProfileConfig::default() };
        let exact = criterion_profile_exact(&engine, &form, &[], &gamma, &cfg).unwrap();
        let float = criterion_profile(&golden(), &xi, &[], &gamma, &cfg).unwrap();
        prop_assert!(exact.exact);
        for (n, (x, y)) in exact.eps.iter().zip(&float.eps).enumerate() {
            prop_assert!((x - y).abs() < 1e-8, "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn constructed_profiles_respect_pisot_bound() {
    let run = run_spectrum(&fixture("fib.json"), &SpectrumConfig::default()).unwrap();
    let mut checked = 0;
    for (entry, bound) in run.report.candidates.iter().zip(&run.bounds) {
        if !matches!(entry.candidate.provenance, Provenance::Constructed { .. }) {
            continue;
        }
        let bound = bound.as_ref().expect("Pisot factor carries a bound");
        let n = entry.profile.eps.len();
        for k in n / 2..n {
            assert!(entry.profile.eps[k] <= 10.0 * bound[k], "n={k}: {} > 10·{}", entry.profile.eps[k], bound[k]);
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn density_tracks_pisot_family_on_fixtures() {
    for name in ["fib.json", "nonpisot1d.json", "fib_x_fib.json", "fib_x_nonpisot.json"] {
        let run = run_spectrum(&fixture(name), &SpectrumConfig::default()).unwrap();
        let pisot = run.banner.pisot_family == Verdict::Yes;
        assert_eq!(run.report.relatively_dense, pisot, "{name}");
        assert!(run.report.candidates.iter().any(|c| c.candidate.gamma.iter().all(|&g| g == 0.0) && c.accepted()), "{name}");
    }
}
