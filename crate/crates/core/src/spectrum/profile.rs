//! Decay profiles `ε_n = max_x dist(⟨φⁿx, γ⟩, ℤ)` over a sample of return vectors.

use serde::Serialize;

use super::pairing::{ExactForm, PairingEngine};
use super::SpectrumError;
use crate::algebra::dist_to_integers;
use crate::expansion::{BlockVector, Expansion};

/// Largest pairing magnitude kept in double precision.
pub const OVERFLOW_GUARD: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileConfig {
    /// Profile length `N`; `ε_0..ε_N` are computed.
    pub n_max: usize,
    pub decay_threshold: f64,
    /// Largest per-step factor counted as decay.
    pub rate_cap: f64,
    pub stall_floor: f64,
    pub period_tol: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { n_max: 40, decay_threshold: 1e-3, rate_cap: 0.95, stall_floor: 0.05, period_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileVerdict {
    Decays,
    Stalls,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub eps: Vec<f64>,
    /// `exp` of the least-squares slope of `log ε_n` over the second half of the
    /// profile (a per-step factor); 0 when the tail vanishes.
    pub fitted_rate: f64,
    pub verdict: ProfileVerdict,
    /// Step at which the overflow guard stopped the profile.
    pub truncated_at: Option<usize>,
    pub period_ok: bool,
    /// Whether the exact pairing route was used.
    pub exact: bool,
}

impl DecayProfile {
    pub fn last(&self) -> f64 {
        self.eps.last().copied().unwrap_or(0.0)
    }

    fn finish(eps: Vec<f64>, truncated_at: Option<usize>, period_ok: bool, exact: bool, cfg: &ProfileConfig) -> Self {
        let tail_start = eps.len() / 2;
        let tail = &eps[tail_start..];
        let fitted_rate = fit_rate(tail_start, tail);
        let last = eps.last().copied().unwrap_or(0.0);
        let min_tail = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let complete = truncated_at.is_none() && eps.len() > cfg.n_max;
        let verdict = if !period_ok || (tail.len() >= 2 && min_tail > cfg.stall_floor) {
            ProfileVerdict::Stalls
        } else if complete && last < cfg.decay_threshold && fitted_rate < cfg.rate_cap {
            ProfileVerdict::Decays
        } else {
            ProfileVerdict::Inconclusive
        };
        DecayProfile { eps, fitted_rate, verdict, truncated_at, period_ok, exact }
    }
}

/// Least-squares slope of `log ε` against `n`, exponentiated; zero entries are skipped.
fn fit_rate(start: usize, tail: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.0)
        .map(|(k, &e)| ((start + k) as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return if tail.iter().all(|&e| e == 0.0) { 0.0 } else { 1.0 };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).exp()
}

fn check_periods(periods: &[BlockVector], gamma: &BlockVector, tol: f64) -> Result<bool, SpectrumError> {
    for k in periods {
        if dist_to_integers(k.dot(gamma))? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_input(xi: &[BlockVector], cfg: &ProfileConfig) -> Result<(), SpectrumError> {
    if xi.is_empty() {
        return Err(SpectrumError::InvalidArgument("empty return-vector sample".into()));
    }
    if cfg.n_max < 8 {
        return Err(SpectrumError::InvalidArgument(format!("profile length {} is below 8", cfg.n_max)));
    }
    Ok(())
}

/// Double-precision profile: `ε_n` from `⟨x, (φᵀ)ⁿγ⟩`, stopping once a pairing
/// exceeds `2^53` in magnitude.
pub fn criterion_profile(
    phi: &Expansion,
    xi: &[BlockVector],
    periods: &[BlockVector],
    gamma: &BlockVector,
    cfg: &ProfileConfig,
) -> Result<DecayProfile, SpectrumError> {
    check_input(xi, cfg)?;
    let period_ok = check_periods(periods, gamma, cfg.period_tol)?;
    let mut eps = Vec::with_capacity(cfg.n_max + 1);
    let mut g = gamma.clone();
    let mut truncated_at = None;
    for n in 0..=cfg.n_max {
        let mut worst: f64 = 0.0;
        for x in xi {
            let v = x.dot(&g);
            if !v.is_finite() || v.abs() > OVERFLOW_GUARD {
                truncated_at = Some(n);
                break;
            }
            worst = worst.max(dist_to_integers(v)?);
        }
        if truncated_at.is_some() {
            break;
        }
        eps.push(worst);
        g = phi.apply_transpose(&g)?;
    }
    Ok(DecayProfile::finish(eps, truncated_at, period_ok, false, cfg))
}

/// Profile through the exact pairing: integer parts modulo the form's
/// denominator, plus the conjugate residuals in double precision.
pub fn criterion_profile_exact(
    engine: &PairingEngine,
    form: &ExactForm,
    periods: &[BlockVector],
    gamma: &BlockVector,
    cfg: &ProfileConfig,
) -> Result<DecayProfile, SpectrumError> {
    if engine.samples() == 0 {
        return Err(SpectrumError::InvalidArgument("empty return-vector sample".into()));
    }
    check_input(std::slice::from_ref(gamma), cfg)?;
    let period_ok = check_periods(periods, gamma, cfg.period_tol)?;
    let prep = engine.prepare(form)?;
    let mut eps = Vec::with_capacity(cfg.n_max + 1);
    let mut truncated_at = None;
    for n in 0..=cfg.n_max {
        match engine.max_distance(&prep, n)? {
            Some(e) => eps.push(e),
            None => {
                truncated_at = Some(n);
                break;
            }
        }
    }
    Ok(DecayProfile::finish(eps, truncated_at, period_ok, true, cfg))
}
