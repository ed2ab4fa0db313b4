//! End-to-end runs: expand a rule, locate control points in the module, build
//! and screen the eigenvalue family, scan a grid, and summarize; plus the Meyer
//! gap trend.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{is_pisot_family, Verdict};
use crate::expansion::{BlockVector, ModuleCoords, DEFAULT_ANGULAR_TOL, DEFAULT_F_TOL};
use crate::spectrum::{
    fit_rho, pisot_decay_bound, screen_family, weak_mixing_probe, EigenvalueCandidate, EigenvalueReport, ExactBasis,
    ExactForm, GridSpec, PairingEngine, ProfileConfig, ProfileVerdict, Provenance, ReportEntry, Screen,
    SpectrumError, DEFAULT_DENOMINATOR_BOUND,
};
use crate::tiling::{
    center_and_radius, meyer_gap, meyer_gap_exact, periods, return_vectors, ControlPoints, SubstitutionRule,
    TilingError, TilingPatch, DEFAULT_TILE_CAP,
};

const PISOT_TOL: f64 = 1e-12;
const MAX_PERIOD_CANDIDATES: usize = 50;

#[derive(Debug, Clone)]
pub struct SpectrumConfig {
    pub profile: ProfileConfig,
    pub k_max: usize,
    pub grid: Option<GridSpec>,
    /// Extra user-supplied wave vectors.
    pub extra: Vec<BlockVector>,
    /// Expansion stops once the patch has this many tiles.
    pub tile_target: usize,
    pub tile_cap: usize,
    /// The return-vector window reaches the `window_rank`-th nearest control point.
    pub window_rank: usize,
    pub xi_cap: usize,
    pub denominator_bound: u32,
    /// Start from this prototile (0-based) at the origin instead of a fixed-point seed.
    pub seed_tile: Option<usize>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            profile: ProfileConfig::default(),
            k_max: 10,
            grid: Some(GridSpec { lo: -2.0, hi: 2.0, spacing: 0.25 }),
            extra: Vec::new(),
            tile_target: 4000,
            tile_cap: DEFAULT_TILE_CAP,
            window_rank: 240,
            xi_cap: 10_000,
            denominator_bound: DEFAULT_DENOMINATOR_BOUND,
            seed_tile: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: String,
    pub factor: Option<usize>,
    pub message: String,
}

impl StageError {
    fn new(stage: &str, factor: Option<usize>, err: impl std::fmt::Display) -> Self {
        StageError { stage: stage.into(), factor, message: err.to_string() }
    }
}

/// The three statements of the main equivalence, as observed on this run.
#[derive(Debug, Clone, Serialize)]
pub struct Banner {
    pub pisot_family: Verdict,
    pub pisot_family_per_factor: Vec<Verdict>,
    pub relatively_dense: bool,
    /// No nonzero candidate decays.
    pub weak_mixing_evidence: bool,
    /// `pisot_family = yes ⇔ relatively_dense ⇔ ¬weak_mixing_evidence`.
    pub consistent: bool,
    /// Factors with different verdicts; the equivalence is stated for a
    /// spectrum of one conjugacy class and need not hold then.
    pub mixed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorFit {
    pub factor: usize,
    pub b: Option<String>,
    pub tau_determinant: Option<f64>,
    pub worst_residual: Option<f64>,
    pub family_k: Option<usize>,
    pub family_passed: bool,
    pub family_determinant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub tiles: usize,
    pub generation: usize,
    pub seed_power: usize,
    pub window: f64,
    pub return_vectors: usize,
    pub return_vectors_truncated: bool,
    pub periods: usize,
    pub exact_pairing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRun {
    pub banner: Banner,
    #[serde(flatten)]
    pub report: EigenvalueReport,
    pub factors: Vec<FactorFit>,
    pub stats: RunStats,
    pub errors: Vec<StageError>,
    #[serde(skip)]
    pub forms: Vec<Option<ExactForm>>,
    #[serde(skip)]
    pub screen: Option<Screen>,
    #[serde(skip)]
    pub basis: Option<ExactBasis>,
    /// `bound_n` per candidate, where a Pisot bound applies.
    #[serde(skip)]
    pub bounds: Vec<Option<Vec<f64>>>,
    /// Fitted `ρ` per factor.
    #[serde(skip)]
    pub rhos: Vec<Option<DMatrix<f64>>>,
}

/// Compact JSON rows `{gamma, provenance, verdict, rate}` of a report.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateRow {
    pub gamma: Vec<f64>,
    pub provenance: Provenance,
    pub verdict: ProfileVerdict,
    pub rate: f64,
    pub eps_last: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub banner: Banner,
    pub candidates: Vec<CandidateRow>,
    pub rank: usize,
    pub relatively_dense: bool,
    pub factors: Vec<FactorFit>,
    pub stats: RunStats,
    pub errors: Vec<StageError>,
}

impl SpectrumRun {
    pub fn to_report_json(&self) -> ReportJson {
        ReportJson {
            banner: self.banner.clone(),
            candidates: self
                .report
                .candidates
                .iter()
                .map(|e| CandidateRow {
                    gamma: e.candidate.gamma.clone(),
                    provenance: e.candidate.provenance,
                    verdict: e.profile.verdict,
                    rate: e.profile.fitted_rate,
                    eps_last: e.profile.last(),
                    exact: e.profile.exact,
                })
                .collect(),
            rank: self.report.rank,
            relatively_dense: self.report.relatively_dense,
            factors: self.factors.clone(),
            stats: self.stats.clone(),
            errors: self.errors.clone(),
        }
    }
}

/// Seed patch and the power `p` with which it nests.
pub fn seed_patch(rule: &SubstitutionRule, seed_tile: Option<usize>) -> Result<(TilingPatch, usize), TilingError> {
    match seed_tile {
        Some(label) if label >= rule.kappa() => Err(TilingError::IndexOutOfRange { index: label, len: rule.kappa() }),
        Some(label) => Ok((TilingPatch::single(rule.origin_tile(label)), 1)),
        None => {
            let s = rule.fixed_point_seed()?;
            Ok((s.patch, s.power))
        }
    }
}

/// Expands by multiples of `power` until `done` holds or the cap is reached.
fn grow(
    rule: &SubstitutionRule,
    seed: TilingPatch,
    power: usize,
    cap: usize,
    mut done: impl FnMut(&TilingPatch) -> Result<bool, TilingError>,
) -> Result<TilingPatch, TilingError> {
    let mut cur = seed;
    while !done(&cur)? {
        match rule.expand(&cur, power, cap) {
            Ok(next) => cur = next,
            Err(TilingError::ResourceLimit { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(cur)
}

struct FactorState {
    rho: DMatrix<f64>,
    /// Integer coordinates of the return vectors, `[sample][copy][r]`.
    xi_coords: Vec<Vec<Vec<num_bigint::BigInt>>>,
}

fn fit_factor(
    rule: &SubstitutionRule,
    f: usize,
    cp: &ControlPoints,
    cp_sample: &[usize],
    xi_vectors: &[BlockVector],
    xi_exact: Option<&[Vec<ModuleCoords>]>,
    cfg: &SpectrumConfig,
    fit: &mut FactorFit,
) -> Result<FactorState, SpectrumError> {
    let e = rule.expansion();
    let map = &e.factors()[f];
    // Return vectors join the scan: a one-sided patch may have no control
    // point near some α_j, while Ξ is symmetric.
    let mut cands: Vec<BlockVector> = cp.points.iter().map(|p| e.factor_part(p, f)).collect();
    cands.extend(xi_vectors.iter().map(|x| e.factor_part(x, f)));
    let picked = map.select_basis_points(&cands, DEFAULT_ANGULAR_TOL, DEFAULT_F_TOL)?;
    let tau = match (&cp.exact, xi_exact) {
        (Some(ex), Some(xe)) => {
            // Each y_j lies in H_j, so its module coordinates are its own part.
            let n_cp = cp.points.len();
            let ys: Vec<ModuleCoords> =
                picked.iter().map(|&i| if i < n_cp { ex[i][f].clone() } else { xe[i - n_cp][f].clone() }).collect();
            map.fit_tau_exact(&ys)?
        }
        _ => map.fit_tau(&picked.iter().map(|&i| cands[i].clone()).collect::<Vec<_>>())?,
    };
    fit.tau_determinant = Some(tau.determinant);
    let mut samples: Vec<BlockVector> = cp_sample.iter().map(|&i| cands[i].clone()).collect();
    samples.extend(xi_vectors.iter().map(|x| e.factor_part(x, f)));
    let exact: Option<Vec<ModuleCoords>> = match (&cp.exact, xi_exact) {
        (Some(ex), Some(xe)) => {
            let mut v: Vec<ModuleCoords> = cp_sample.iter().map(|&i| ex[i][f].clone()).collect();
            v.extend(xe.iter().map(|p| p[f].clone()));
            Some(v)
        }
        _ => None,
    };
    let rho = fit_rho(map, &tau, &samples, exact.as_deref(), cfg.denominator_bound)?;
    fit.b = Some(rho.b.to_string());
    fit.worst_residual = Some(rho.worst_residual);
    let xi_coords = rho.coords[cp_sample.len()..].to_vec();
    Ok(FactorState { rho: rho.rho, xi_coords })
}

/// Runs the whole spectrum pipeline. Stage failures are recorded in `errors`
/// and the remaining stages run on what is available; only failures before
/// return vectors exist are returned as `Err`.
pub fn run_spectrum(rule: &SubstitutionRule, cfg: &SpectrumConfig) -> Result<SpectrumRun, TilingError> {
    let e = rule.expansion().clone();
    let d = e.dim();
    let mut errors = Vec::new();

    let (seed, power) = seed_patch(rule, cfg.seed_tile)?;
    let patch = grow(rule, seed, power, cfg.tile_cap, |p| Ok(p.len() >= cfg.tile_target))?;
    let cp = rule.control_points(&patch)?;
    let (center, inradius) = center_and_radius(&cp.points).ok_or(TilingError::Empty)?;
    let mut dists: Vec<f64> = cp.points.iter().map(|p| (p - &center).norm()).collect();
    dists.sort_by(f64::total_cmp);
    let rank = cfg.window_rank.min(dists.len()).max(1) - 1;
    let window = dists[rank].min(inradius.max(dists[0]));
    let xi = return_vectors(&patch, &cp, window, cfg.xi_cap);
    let kset = periods(&patch, &xi, window, MAX_PERIOD_CANDIDATES);
    let cp_sample: Vec<usize> = (0..cp.points.len()).filter(|&i| (&cp.points[i] - &center).norm() <= window).collect();

    let verdicts: Vec<Verdict> = e.factors().iter().map(|m| is_pisot_family(m.selection(), PISOT_TOL)).collect();
    let mut fits = Vec::new();
    let mut states = Vec::new();
    for f in 0..e.factors().len() {
        let mut fit = FactorFit {
            factor: f,
            b: None,
            tau_determinant: None,
            worst_residual: None,
            family_k: None,
            family_passed: false,
            family_determinant: None,
        };
        match fit_factor(rule, f, &cp, &cp_sample, &xi.vectors, xi.exact.as_deref(), cfg, &mut fit) {
            Ok(s) => states.push(Some(s)),
            Err(err) => {
                errors.push(StageError::new("rho", Some(f), err));
                states.push(None);
            }
        }
        fits.push(fit);
    }

    let max_deg = e.factors().iter().map(|m| m.min_poly().degree()).max().unwrap_or(1);
    let max_m = e.factors().iter().map(|m| m.m()).max().unwrap_or(1);
    let max_index = cfg.profile.n_max + cfg.k_max + max_m + 2 * max_deg + 2;
    let engine = if states.iter().all(Option::is_some) {
        let coords = (0..xi.vectors.len())
            .map(|s| states.iter().map(|st| st.as_ref().expect("checked").xi_coords[s].clone()).collect())
            .collect();
        match PairingEngine::new(&e, coords, max_index) {
            Ok(eng) => Some(eng),
            Err(err) => {
                errors.push(StageError::new("pairing", None, err));
                None
            }
        }
    } else {
        None
    };
    let max_coef = engine.as_ref().map(|g| g.max_coefficient());
    let screen = Screen { expansion: e.clone(), xi: xi.vectors.clone(), periods: kset.clone(), engine, cfg: cfg.profile };

    let mut entries: Vec<ReportEntry> = Vec::new();
    let mut forms: Vec<Option<ExactForm>> = Vec::new();
    let mut bounds: Vec<Option<Vec<f64>>> = Vec::new();
    for (f, st) in states.iter().enumerate() {
        let Some(st) = st else { continue };
        match screen_family(&screen, f, &st.rho, cfg.k_max) {
            Ok(fam) => {
                fits[f].family_k = Some(fam.k);
                fits[f].family_passed = fam.passed;
                fits[f].family_determinant = Some(fam.determinant);
                if !fam.passed {
                    errors.push(StageError::new("family", Some(f), SpectrumError::NoPassingK { k_max: cfg.k_max }));
                }
                let map = &e.factors()[f];
                let bound = match (verdicts[f], max_coef) {
                    (Verdict::Yes, Some(c)) => (0..=cfg.profile.n_max)
                        .map(|n| pisot_decay_bound(map.selection(), n).map(|b| b * c * map.min_poly().degree() as f64))
                        .collect::<Result<Vec<f64>, _>>()
                        .ok(),
                    _ => None,
                };
                for c in fam.members {
                    let provenance = Provenance::Constructed { factor: f, j: c.member.copy, l: c.l, k: c.k };
                    entries.push(ReportEntry {
                        candidate: EigenvalueCandidate { gamma: c.gamma, provenance },
                        profile: c.profile,
                    });
                    forms.push(screen.engine.is_some().then(|| ExactForm::single(c.member)));
                    bounds.push(bound.clone());
                }
            }
            Err(err) => errors.push(StageError::new("family", Some(f), err)),
        }
    }

    let basis = if screen.engine.is_some() {
        let rhos: Vec<DMatrix<f64>> = states.iter().map(|s| s.as_ref().expect("engine implies fits").rho.clone()).collect();
        match ExactBasis::new(&e, &rhos) {
            Ok(b) => Some(b),
            Err(err) => {
                errors.push(StageError::new("basis", None, err));
                None
            }
        }
    } else {
        None
    };

    let n_grid = match &cfg.grid {
        Some(g) => match g.points(d) {
            Ok(p) => p.len(),
            Err(err) => {
                errors.push(StageError::new("grid", None, err));
                0
            }
        },
        None => 0,
    };
    let grid = cfg.grid.filter(|_| n_grid > 0);
    match weak_mixing_probe(&screen, basis.as_ref(), grid.as_ref(), &cfg.extra) {
        Ok(probe) => {
            for (i, entry) in probe.entries.into_iter().enumerate() {
                let provenance = if i < n_grid { Provenance::Grid } else { Provenance::User };
                let g = BlockVector::from_vec(entry.gamma.clone());
                forms.push(basis.as_ref().and_then(|b| b.form_for(&g)));
                bounds.push(None);
                entries.push(ReportEntry {
                    candidate: EigenvalueCandidate { gamma: entry.gamma, provenance },
                    profile: entry.profile,
                });
            }
        }
        Err(err) => errors.push(StageError::new("probe", None, err)),
    }

    let report = EigenvalueReport::new(entries, d);
    let overall = if verdicts.iter().all(|&v| v == Verdict::Yes) {
        Verdict::Yes
    } else if verdicts.contains(&Verdict::No) {
        Verdict::No
    } else {
        Verdict::Undecidable
    };
    let wm = !report.accepted().any(|c| c.candidate.gamma.iter().any(|&x| x != 0.0));
    let dense = report.relatively_dense;
    let consistent = (overall == Verdict::Yes) == dense && dense == !wm;
    let mixed = verdicts.windows(2).any(|w| w[0] != w[1]);
    let note = mixed.then(|| {
        "factors have different spectra; the equivalence assumes one conjugacy class, so each axis is reported separately"
            .to_string()
    });
    let banner = Banner {
        pisot_family: overall,
        pisot_family_per_factor: verdicts,
        relatively_dense: dense,
        weak_mixing_evidence: wm,
        consistent,
        mixed,
        note,
    };
    let stats = RunStats {
        tiles: patch.len(),
        generation: patch.generation,
        seed_power: power,
        window,
        return_vectors: xi.vectors.len(),
        return_vectors_truncated: xi.truncated,
        periods: kset.len(),
        exact_pairing: screen.engine.is_some(),
    };
    let rhos = states.into_iter().map(|s| s.map(|s| s.rho)).collect();
    Ok(SpectrumRun { banner, report, factors: fits, stats, errors, forms, screen: Some(screen), basis, bounds, rhos })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureCheck {
    pub a: usize,
    pub b: usize,
    pub sum: Vec<f64>,
    pub verdict: ProfileVerdict,
}

/// Profiles `γ_a + γ_b` for every pair of accepted nonzero candidates
/// (distinct wave vectors only).
pub fn group_closure(run: &SpectrumRun) -> Result<Vec<ClosureCheck>, SpectrumError> {
    let screen = run.screen.as_ref().ok_or_else(|| SpectrumError::InvalidArgument("run has no screen".into()))?;
    let mut idx: Vec<usize> = Vec::new();
    for (i, c) in run.report.candidates.iter().enumerate() {
        let g = &c.candidate.gamma;
        if c.accepted() && g.iter().any(|&x| x != 0.0) && !idx.iter().any(|&j| run.report.candidates[j].candidate.gamma == *g) {
            idx.push(i);
        }
    }
    let mut out = Vec::new();
    for (p, &a) in idx.iter().enumerate() {
        for &b in &idx[p..] {
            let ga = &run.report.candidates[a].candidate.gamma;
            let gb = &run.report.candidates[b].candidate.gamma;
            let sum = BlockVector::from_iterator(ga.len(), ga.iter().zip(gb).map(|(x, y)| x + y));
            let form = match (&run.forms[a], &run.forms[b]) {
                (Some(fa), Some(fb)) => Some(fa.add(fb)),
                _ => run.basis.as_ref().and_then(|bs| bs.form_for(&sum)),
            };
            let profile = screen.profile(&sum, form.as_ref())?;
            out.push(ClosureCheck { a, b, sum: sum.iter().copied().collect(), verdict: profile.verdict });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapTrend {
    Stable,
    Shrinking,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeyerEntry {
    pub window: f64,
    pub gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeyerRun {
    pub windows: Vec<MeyerEntry>,
    pub trend: GapTrend,
    /// `(max − min)/max` over the computed gaps.
    pub variation: Option<f64>,
    /// Gap at the largest window over the gap at the smallest.
    pub ratio: Option<f64>,
    pub tiles: usize,
    pub radius: f64,
}

pub const STABLE_VARIATION: f64 = 0.1;
pub const SHRINK_RATIO: f64 = 0.5;

/// Minimum gap of `Y − Y` per window, with `Y` the control points of a patch
/// grown until its inradius is three times the largest window.
pub fn run_meyer(
    rule: &SubstitutionRule,
    windows: &[f64],
    tile_cap: usize,
    seed_tile: Option<usize>,
) -> Result<MeyerRun, TilingError> {
    let mut ws: Vec<f64> = windows.to_vec();
    ws.sort_by(f64::total_cmp);
    let w_max = ws.last().copied().unwrap_or(0.0);
    let (seed, power) = seed_patch(rule, seed_tile)?;
    let patch = grow(rule, seed, power, tile_cap, |p| {
        let cp = rule.control_points(p)?;
        Ok(center_and_radius(&cp.points).map(|(_, r)| r >= 3.0 * w_max).unwrap_or(false))
    })?;
    let cp = rule.control_points(&patch)?;
    let radius = center_and_radius(&cp.points).map(|(_, r)| r).unwrap_or(0.0);
    let entries: Vec<MeyerEntry> = ws
        .iter()
        .map(|&w| {
            let res = match &cp.exact {
                Some(ex) => meyer_gap_exact(&cp.points, ex, w),
                None => meyer_gap(&cp.points, w),
            };
            match res {
                Ok(g) => MeyerEntry { window: w, gap: Some(g), error: None },
                Err(e) => MeyerEntry { window: w, gap: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let gaps: Vec<f64> = entries.iter().filter_map(|e| e.gap).filter(|g| g.is_finite()).collect();
    let (trend, variation, ratio) = if gaps.len() < 2 {
        (GapTrend::Inconclusive, None, None)
    } else {
        let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let variation = (hi - lo) / hi;
        let ratio = gaps[gaps.len() - 1] / gaps[0];
        let trend = if variation < STABLE_VARIATION {
            GapTrend::Stable
        } else if ratio <= SHRINK_RATIO {
            GapTrend::Shrinking
        } else {
            GapTrend::Inconclusive
        };
        (trend, Some(variation), Some(ratio))
    };
    Ok(MeyerRun { windows: entries, trend, variation, ratio, tiles: patch.len(), radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::SubstitutionRule;

    pub(crate) fn fib() -> SubstitutionRule {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let text = format!(
            r#"{{"prototiles":[{{"label":1,"box":[[0,1]]}},{{"label":2,"box":[[0,{}]]}}],
            "digits":{{"1,1":[[0]],"2,1":[[1]],"1,2":[[0]]}},
            "expansion":{{"min_poly":["-1","-1","1"],"real_blocks":[{phi}],"complex_blocks":[],"multiplicity":1}},
            "tile_map":[0,0]}}"#,
            1.0 / phi
        );
        SubstitutionRule::from_json(&text).unwrap()
    }

    #[test]
    fn fibonacci_run() {
        let run = run_spectrum(&fib(), &SpectrumConfig::default()).unwrap();
        assert!(run.errors.is_empty(), "{:?}", run.errors);
        assert!(run.stats.exact_pairing);
        assert_eq!(run.banner.pisot_family, Verdict::Yes);
        assert!(run.report.relatively_dense);
        assert!(run.banner.consistent);
        assert!(!run.banner.weak_mixing_evidence);
        let fam = &run.factors[0];
        assert!(fam.family_passed);
        assert!(group_closure(&run).unwrap().iter().all(|c| c.verdict == ProfileVerdict::Decays));
    }

    #[test]
    fn fibonacci_meyer_stable() {
        let m = run_meyer(&fib(), &[10.0, 20.0, 40.0], DEFAULT_TILE_CAP, None).unwrap();
        assert_eq!(m.trend, GapTrend::Stable, "{m:?}");
        let one = run_meyer(&fib(), &[10.0], DEFAULT_TILE_CAP, None).unwrap();
        assert_eq!(one.trend, GapTrend::Inconclusive);
    }

    #[test]
    fn seed_tile_out_of_range() {
        assert!(matches!(seed_patch(&fib(), Some(5)), Err(TilingError::IndexOutOfRange { .. })));
    }
}
