//! Acceptance criteria. Each prints a single `criterion N: PASS|FAIL ...` line;
//! the process exits nonzero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{rngs::StdRng, Rng, SeedableRng};

use pisotile::algebra::{is_pisot_family, isolate_roots, power_sums, IntPolynomial, SpectrumSelection, Verdict};
use pisotile::expansion::{complex_inner, ExpansionMap};
use pisotile::output::to_canonical_json;
use pisotile::pipeline::{group_closure, run_meyer, run_spectrum, GapTrend, SpectrumConfig};
use pisotile::spectrum::{construct_family, GridSpec, ProfileVerdict, Provenance, SpectrumError};
use pisotile::tiling::{direct_product, SubstitutionRule, TilingPatch, DEFAULT_TILE_CAP};

fn fixture(name: &str) -> SubstitutionRule {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    SubstitutionRule::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn verdict(n: usize, ok: bool, elapsed: Duration, limit: Option<Duration>, detail: String) {
    let in_time = limit.map_or(true, |l| elapsed <= l);
    let pass = ok && in_time;
    let limit_s = limit.map(|l| format!(" (limit {:.0?})", l)).unwrap_or_default();
    println!(
        "criterion {n}: {} {detail}; runtime {:.3?}{limit_s}",
        if pass { "PASS" } else { "FAIL" },
        elapsed
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn cubic() -> IntPolynomial {
    IntPolynomial::from_i64(&[3, -4, -1, 1]).unwrap()
}

fn criterion_1_pisot_family_classifier() {
    let t = Instant::now();
    let p = cubic();
    let roots = isolate_roots(&p, 1e-12).unwrap();
    let find = |target: f64| {
        (0..3).find(|&i| roots.roots[i].value.im == 0.0 && (roots.roots[i].value.re - target).abs() < 1e-5).unwrap()
    };
    let (l1, l2) = (find(2.19869), find(-1.91223));
    let both = SpectrumSelection::new(p.clone(), roots.clone(), [l1, l2], 1).unwrap();
    let one = SpectrumSelection::new(p, roots.clone(), [l1], 1).unwrap();
    let v_both = is_pisot_family(&both, 1e-12);
    let v_one = is_pisot_family(&one, 1e-12);
    let round5 = |x: f64| (x * 1e5).round() / 1e5;
    let r1 = round5(roots.roots[l1].value.re);
    let r2 = round5(roots.roots[l2].value.re);
    let ok = v_both == Verdict::Yes && v_one == Verdict::No && r1 == 2.19869 && r2 == -1.91223;
    verdict(
        1,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(1)),
        format!("{{λ1,λ2}} → {v_both:?}, {{λ1}} → {v_one:?}, roots {r1}, {r2}"),
    );
}

fn criterion_2_exact_power_sums() {
    let t = Instant::now();
    let p = cubic();
    let exact = power_sums(&p, 20).unwrap();
    let roots = isolate_roots(&p, 1e-12).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for n in 1..=20 {
        let float: f64 = roots.roots.iter().map(|r| r.value.powi(n as i32).re).sum();
        // Each |z^n − w^n| ≤ (|z| + ρ)^n − |z|^n for |z − w| ≤ ρ; plus rounding.
        let bound: f64 = roots
            .roots
            .iter()
            .map(|r| {
                let m = r.value.norm();
                (m + r.radius).powi(n as i32) - m.powi(n as i32) + 4.0 * n as f64 * f64::EPSILON * m.powi(n as i32)
            })
            .sum();
        let err = (float - exact[n - 1].to_f64().unwrap()).abs();
        worst_ratio = worst_ratio.max(err / bound);
    }
    verdict(
        2,
        worst_ratio <= 1.0,
        t.elapsed(),
        Some(Duration::from_secs(1)),
        format!("p_1..p_20 exact; worst |float − exact| / bound = {worst_ratio:.3e}"),
    );
}

fn criterion_3_f_transform_identities() {
    let t = Instant::now();
    let configs: Vec<(&str, ExpansionMap)> = {
        let golden = IntPolynomial::from_i64(&[-1, -1, 1]).unwrap();
        let gr = isolate_roots(&golden, 1e-12).unwrap();
        let phi = gr.roots.iter().map(|r| r.value.re).fold(f64::MIN, f64::max);
        // 1 ± i, modulus √2
        let gauss = IntPolynomial::from_i64(&[2, -2, 1]).unwrap();
        let cubic = IntPolynomial::from_i64(&[-3, -1, 0, 1]).unwrap();
        let cr = isolate_roots(&cubic, 1e-12).unwrap();
        let real = cr.roots.iter().find(|r| r.is_real()).unwrap().value.re;
        let c = cr.roots.iter().find(|r| r.value.im > 0.0).unwrap().value;
        vec![
            ("(1,0,1)", ExpansionMap::new(golden, vec![phi], vec![], 1).unwrap()),
            ("(0,1,1)", ExpansionMap::new(gauss, vec![], vec![(1.0, 1.0)], 1).unwrap()),
            ("(1,1,2)", ExpansionMap::new(cubic, vec![real], vec![(c.re, c.im)], 2).unwrap()),
        ]
    };
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for (_, e) in &configs {
        let diag: Vec<Complex64> = e.eigenvalues();
        for _ in 0..1000 {
            let j = rng.random_range(0..e.multiplicity());
            let mut x = DVector::zeros(e.dim());
            let mut y = DVector::zeros(e.dim());
            for k in 0..e.m() {
                x[j * e.m() + k] = rng.random_range(-1.0..1.0);
                y[j * e.m() + k] = rng.random_range(-1.0..1.0);
            }
            let fx = e.f_transform(&x).unwrap();
            let fy = e.f_transform(&y).unwrap();
            let fpx = e.f_transform(&e.apply(&x).unwrap()).unwrap();
            let fptx = e.f_transform(&e.apply_transpose(&x).unwrap()).unwrap();
            for k in 0..e.m() {
                worst = worst.max((fpx.entries[k] - diag[k] * fx.entries[k]).norm());
                worst = worst.max((fptx.entries[k] - diag[k].conj() * fx.entries[k]).norm());
            }
            let inner = complex_inner(&fx.entries, &fy.entries);
            worst = worst.max((inner - Complex64::new(x.dot(&y), 0.0)).norm());
        }
    }
    verdict(
        3,
        worst <= 1e-12,
        t.elapsed(),
        Some(Duration::from_secs(1)),
        format!("3 identities on 3×10³ vectors, (s,t,J) ∈ {{(1,0,1),(0,1,1),(1,1,2)}}; worst deviation {worst:.2e}"),
    );
}

fn criterion_4_fibonacci_end_to_end() {
    let t = Instant::now();
    let rule = fixture("fib.json");
    let a = TilingPatch::single(rule.origin_tile(0));
    let p7 = rule.expand(&a, 7, DEFAULT_TILE_CAP).unwrap();
    let p8 = rule.expand(&p7, 1, DEFAULT_TILE_CAP).unwrap();
    let census = p8.census(2);

    // φ(c(T)) = c(γT): the designated child of tile i of ω⁷(a) sits in ω⁸(a).
    let c7 = rule.control_points(&p7).unwrap();
    let c8 = rule.control_points(&p8).unwrap();
    let phi = rule.expansion().factors()[0].real_blocks()[0];
    let mut pos = 0;
    let mut worst: f64 = 0.0;
    for (i, tile) in p7.tiles.iter().enumerate() {
        let child = pos + rule.tile_map()[tile.label];
        worst = worst.max((phi * c7.points[i][0] - c8.points[child][0]).abs());
        pos += rule.children(tile.label).len();
    }

    let run = run_spectrum(&rule, &SpectrumConfig::default()).unwrap();
    let fam: Vec<_> = run
        .report
        .candidates
        .iter()
        .filter(|c| matches!(c.candidate.provenance, Provenance::Constructed { .. }))
        .collect();
    let k = run.factors[0].family_k.unwrap_or(usize::MAX);
    let eps25 = fam.iter().map(|c| c.profile.eps[25]).fold(0.0, f64::max);
    let rates: Vec<f64> = fam.iter().map(|c| c.profile.fitted_rate).collect();
    let ok = p8.len() == 55
        && census == vec![34, 21]
        && worst <= 1e-10
        && run.factors[0].family_passed
        && k <= 2
        && !fam.is_empty()
        && eps25 < 1e-3
        && rates.iter().all(|r| (0.55..=0.70).contains(r))
        && run.report.relatively_dense;
    verdict(
        4,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(10)),
        format!(
            "{} tiles, census {census:?}, control-point gap {worst:.1e}, K = {k}, ε_25 = {eps25:.2e}, rates {rates:?}, relatively_dense = {}",
            p8.len(),
            run.report.relatively_dense
        ),
    );
}

fn criterion_5_non_pisot_fixture() {
    let t = Instant::now();
    let rule = fixture("nonpisot1d.json");
    let primitive = rule.is_primitive();
    let pisot = is_pisot_family(rule.expansion().factors()[0].selection(), 1e-12);
    let mut cfg = SpectrumConfig { grid: Some(GridSpec { lo: -3.0, hi: 3.0, spacing: 0.1 }), ..SpectrumConfig::default() };
    cfg.profile.n_max = 40;
    let run = run_spectrum(&rule, &cfg).unwrap();
    let no_k = match (&run.screen, &run.rhos[0]) {
        (Some(screen), Some(rho)) => matches!(construct_family(screen, 0, rho, 10), Err(SpectrumError::NoPassingK { k_max: 10 })),
        _ => false,
    };
    let grid: Vec<_> = run.report.candidates.iter().filter(|c| c.candidate.provenance == Provenance::Grid).collect();
    let decaying: Vec<&Vec<f64>> = grid.iter().filter(|c| c.accepted()).map(|c| &c.candidate.gamma).collect();
    let only_zero = decaying.iter().all(|g| g.iter().all(|&x| x == 0.0));
    let ok = primitive && pisot == Verdict::No && no_k && only_zero && grid.len() == 61;
    verdict(
        5,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(60)),
        format!(
            "primitive = {primitive}, pisot_family = {pisot:?}, NoPassingK(10) = {no_k}, {} grid points, decaying {decaying:?}",
            grid.len()
        ),
    );
}

fn criterion_6_meyer_trend() {
    let t = Instant::now();
    let windows = [10.0, 20.0, 40.0, 80.0];
    let fib = run_meyer(&fixture("fib.json"), &windows, DEFAULT_TILE_CAP, None).unwrap();
    let np = run_meyer(&fixture("nonpisot1d.json"), &windows, DEFAULT_TILE_CAP, None).unwrap();
    let fib_var = fib.variation.unwrap_or(f64::INFINITY);
    let np_ratio = np.ratio.unwrap_or(f64::INFINITY);
    let ok = fib.trend == GapTrend::Stable && fib_var < 0.1 && np.trend == GapTrend::Shrinking && np_ratio <= 0.5;
    verdict(
        6,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(30)),
        format!(
            "fib {:?} (variation {fib_var:.2e}), nonpisot1d {:?} (last/first {np_ratio:.3})",
            fib.trend, np.trend
        ),
    );
}

fn kron(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![0; n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn criterion_7_direct_product() {
    let t = Instant::now();
    let fib = fixture("fib.json");
    let fxf = fixture("fib_x_fib.json");
    let built = direct_product(&fib, &fib).unwrap();
    let m = fib.substitution_matrix();
    let kron_ok = fxf.substitution_matrix() == kron(&m, &m) && built.substitution_matrix() == kron(&m, &m);

    let run = run_spectrum(&fixture("fib_x_nonpisot.json"), &SpectrumConfig::default()).unwrap();
    let accepted: Vec<&Vec<f64>> = run.report.accepted().map(|c| &c.candidate.gamma).collect();
    let on_axis = accepted.iter().all(|g| g[1] == 0.0);
    let ok = kron_ok && run.report.rank == 1 && !run.report.relatively_dense && on_axis && accepted.len() > 1;
    verdict(
        7,
        ok,
        t.elapsed(),
        Some(Duration::from_secs(60)),
        format!(
            "Kronecker identity {kron_ok}; fib×nonpisot rank {} of 2, {} accepted all on the first axis = {on_axis}, relatively_dense = {}",
            run.report.rank,
            accepted.len(),
            run.report.relatively_dense
        ),
    );
}

fn criterion_8_group_closure() {
    let t = Instant::now();
    let run = run_spectrum(&fixture("fib.json"), &SpectrumConfig::default()).unwrap();
    let checks = group_closure(&run).unwrap();
    let failed: Vec<_> = checks.iter().filter(|c| c.verdict != ProfileVerdict::Decays).map(|c| c.sum.clone()).collect();
    verdict(
        8,
        !checks.is_empty() && failed.is_empty(),
        t.elapsed(),
        Some(Duration::from_secs(10)),
        format!("{} pair sums checked, failing sums {failed:?}", checks.len()),
    );
}

fn criterion_9_determinism() {
    let t = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["fib.json", "nonpisot1d.json", "fib_x_fib.json", "fib_x_nonpisot.json"] {
        let rule = fixture(name);
        let a = to_canonical_json(&run_spectrum(&rule, &SpectrumConfig::default()).unwrap().to_report_json()).unwrap();
        let b = to_canonical_json(&run_spectrum(&rule, &SpectrumConfig::default()).unwrap().to_report_json()).unwrap();
        ok &= a == b;
        details.push(format!("{name}: {}", if a == b { "identical" } else { "differs" }));
    }
    verdict(9, ok, t.elapsed(), None, details.join(", "));
}

fn main() {
    let criteria: [fn(); 9] = [
        criterion_1_pisot_family_classifier,
        criterion_2_exact_power_sums,
        criterion_3_f_transform_identities,
        criterion_4_fibonacci_end_to_end,
        criterion_5_non_pisot_fixture,
        criterion_6_meyer_trend,
        criterion_7_direct_product,
        criterion_8_group_closure,
        criterion_9_determinism,
    ];
    let failed = criteria.iter().filter(|c| std::panic::catch_unwind(**c).is_err()).count();
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
