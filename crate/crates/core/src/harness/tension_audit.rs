//! Audits of the base tension and of both regularization ladders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::regularize::{BoundReport, Mode, RegularizedTension};
use crate::tension::{HypothesisReport, SurfaceTension};

use super::ledger::{AuditEntry, Ledger};
use super::studies::sup_sigma_error;

pub const TRUNCATED_KS: [u32; 4] = [1, 2, 4, 8];
pub const MOLLIFIED_KS: [u32; 4] = [4, 8, 16, 32];
pub const CONVERGENCE_KS: [u32; 5] = [4, 8, 16, 32, 64];
pub const RANDOM_SAMPLES: usize = 10_000;
pub const SAMPLE_MAX: f64 = 100.0;
pub const BRANCH_TOL: f64 = 1e-8;
/// Allowed spread `max/min` of the fitted constants across `k`.
pub const FIT_SPREAD: f64 = 4.0;

/// `0` followed by a log grid on `[1e-4, SAMPLE_MAX]`.
pub fn log_grid(points: usize) -> Vec<f64> {
    let (a, b) = (1e-4f64.ln(), SAMPLE_MAX.ln());
    std::iter::once(0.0)
        .chain((0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncatedAudit {
    pub k: u32,
    pub s_k: f64,
    /// Largest violation of `0 ≥ σ_k' ≥ σ'`.
    pub slope_violation: f64,
    /// Largest `|τ_k(s) − s|` below `s_k`.
    pub identity_violation: f64,
    /// Largest violation of `0 ≤ τ_k(s) ≤ s`.
    pub tau_range_violation: f64,
    pub max_slope: f64,
    pub max_second: f64,
    pub second_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MollifiedAudit {
    pub k: u32,
    pub branch_error: f64,
    pub branch_samples: usize,
    /// Largest blend-zone slope and its bound `½ sup_{[1/k,k]} σ'`.
    pub blend_max: f64,
    pub blend_bound: f64,
    pub bounds: BoundReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TensionAuditReport {
    pub tension: SurfaceTension,
    pub hypotheses: HypothesisReport,
    pub truncated: Vec<TruncatedAudit>,
    pub mollified: Vec<MollifiedAudit>,
    pub convergence_ks: Vec<u32>,
    pub sup_errors: Vec<f64>,
    pub ledger: Ledger,
}

fn truncated_audit(base: &SurfaceTension, k: u32, samples: &[f64]) -> Result<TruncatedAudit> {
    let reg = RegularizedTension::new(base.clone(), k, Mode::Truncated)?;
    let s_k = reg.s_k();
    let kf = k as f64;
    let (mut slope_v, mut ident_v, mut range_v): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let (mut max_slope, mut max_second, mut second_bound): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let h = 1e-4;
    for &s in samples {
        let d = reg.sigma_k_prime(s);
        let base_d = base.sigma_prime(s)?;
        slope_v = slope_v.max(d).max(base_d - d);
        let tau = reg.tau_k(s)?;
        if s < s_k {
            ident_v = ident_v.max((tau - s).abs());
        }
        range_v = range_v.max(-tau).max(tau - s);
        max_slope = max_slope.max(d.abs());
        if s >= h {
            let dd = (reg.sigma_k_prime(s + h) - reg.sigma_k_prime(s - h)) / (2.0 * h);
            max_second = max_second.max(dd.abs());
            if base_d.abs() <= 2.0 * kf {
                let bd = (base.sigma_prime(s + h)? - base.sigma_prime(s - h)?) / (2.0 * h);
                second_bound = second_bound.max(bd.abs());
            }
        }
    }
    // |T_k| ≤ k, and T_k' vanishes once |σ'| > 2k. Central differences
    // straddling a kink of T_k average the two one-sided values.
    let second_bound = second_bound * (1.0 + 1e-3) + 1e-6;
    let pass = slope_v <= 1e-12
        && ident_v == 0.0
        && range_v <= 1e-12
        && max_slope <= kf * (1.0 + 1e-12)
        && max_second <= second_bound;
    Ok(TruncatedAudit {
        k,
        s_k,
        slope_violation: slope_v,
        identity_violation: ident_v,
        tau_range_violation: range_v,
        max_slope,
        max_second,
        second_bound,
        pass,
    })
}

fn mollified_audit(base: &SurfaceTension, k: u32, samples: &[f64], grid: &[f64]) -> Result<MollifiedAudit> {
    let reg = RegularizedTension::new(base.clone(), k, Mode::Mollified)?;
    let kf = k as f64;
    let (mut err, mut count): (f64, usize) = (0.0, 0);
    let mut blend_max = f64::NEG_INFINITY;
    let lo = (kf - 1.0) / (kf * kf);
    let hi = kf + 1.0 / (kf * kf);
    for &s in samples {
        match reg.branch_prime(s) {
            Some(b) => {
                err = err.max((reg.sigma_k_prime(s) - b).abs());
                count += 1;
            }
            None => {
                if s > lo && s < hi {
                    blend_max = blend_max.max(reg.sigma_k_prime(s));
                }
            }
        }
    }
    let mut sup_base = f64::NEG_INFINITY;
    for i in 0..=4000 {
        let s = 1.0 / kf + (kf - 1.0 / kf) * i as f64 / 4000.0;
        sup_base = sup_base.max(base.sigma_prime(s)?);
    }
    Ok(MollifiedAudit {
        k,
        branch_error: err,
        branch_samples: count,
        blend_max,
        blend_bound: 0.5 * sup_base,
        bounds: reg.audit_prop_bounds(grid)?,
    })
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Runs every tension and ladder audit for `base`; samples are drawn from a
/// stream seeded by `seed`.
pub fn audit_tension(base: &SurfaceTension, seed: u64) -> Result<TensionAuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..RANDOM_SAMPLES).map(|_| rng.random::<f64>() * SAMPLE_MAX).collect();
    let grid = log_grid(400);
    let mut ledger = Ledger::default();

    let hypotheses = base.audit_hypotheses(&grid[1..])?;
    ledger.push(AuditEntry::check(
        "tension_hypotheses",
        hypotheses.pass,
        format!("worst margin {:e}", hypotheses.worst_margin),
    ));

    let truncated = TRUNCATED_KS
        .iter()
        .map(|&k| truncated_audit(base, k, &samples))
        .collect::<Result<Vec<_>>>()?;
    ledger.push(AuditEntry::check(
        "truncated_ladder",
        truncated.iter().all(|t| t.pass),
        truncated
            .iter()
            .map(|t| {
                format!(
                    "k={}: s_k={:e}, slope violation {:e}, τ violations {:e}/{:e}, |σ_k''| ≤ {:e} (bound {:e})",
                    t.k, t.s_k, t.slope_violation, t.identity_violation, t.tau_range_violation, t.max_second, t.second_bound
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    ));

    let mollified = MOLLIFIED_KS
        .iter()
        .map(|&k| mollified_audit(base, k, &samples, &grid))
        .collect::<Result<Vec<_>>>()?;
    let branch = mollified.iter().map(|m| m.branch_error).fold(0.0, f64::max);
    ledger.push(AuditEntry::check(
        "mollified_branch_agreement",
        branch <= BRANCH_TOL,
        format!("largest deviation from the closed branches {branch:e}"),
    ));
    ledger.push(AuditEntry::check(
        "mollified_blend_zone",
        mollified.iter().all(|m| m.blend_max <= m.blend_bound),
        mollified
            .iter()
            .map(|m| format!("k={}: max {:.6} ≤ {:.6}", m.k, m.blend_max, m.blend_bound))
            .collect::<Vec<_>>()
            .join("; "),
    ));

    let sup_errors = CONVERGENCE_KS
        .iter()
        .map(|&k| sup_sigma_error(&RegularizedTension::new(base.clone(), k, Mode::Mollified)?, 10.0))
        .collect::<Result<Vec<_>>>()?;
    ledger.push(AuditEntry::check(
        "uniform_convergence",
        sup_errors.windows(2).all(|w| w[1] < w[0]),
        format!("sup over [0,10] of |σ_k − σ| for k={CONVERGENCE_KS:?}: {sup_errors:?}"),
    ));

    let b: Vec<&BoundReport> = mollified.iter().map(|m| &m.bounds).collect();
    ledger.push(AuditEntry::check(
        "bound_lower_slope",
        b.iter().all(|r| r.lower_ok),
        b.iter()
            .map(|r| {
                format!(
                    "k={}: min margin {:.4}, first failure {:?}, outer-branch crossing {:.4}",
                    r.k, r.min_lower_margin, r.lower_bound_first_failure, r.outer_branch_crossing
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    ));
    ledger.push(AuditEntry::check(
        "bound_negative_slope",
        b.iter().all(|r| r.all_negative),
        "σ_k' < 0 for every sampled s > 0".into(),
    ));
    let c2: Vec<f64> = b.iter().map(|r| r.fitted_c2).collect();
    let c1: Vec<f64> = b.iter().map(|r| r.fitted_c1).collect();
    ledger.push(AuditEntry::check(
        "bound_fitted_constants",
        b.iter().all(|r| r.c1_ok && r.c2_ok) && spread(&c2) <= FIT_SPREAD && spread(&c1) <= FIT_SPREAD,
        format!("fitted C2 {c2:?}, fitted C1 {c1:?}, spread limit {FIT_SPREAD}"),
    ));
    ledger.push(AuditEntry::check(
        "bound_entropy",
        b.iter().all(|r| r.entropy_ok),
        format!(
            "smallest margin of the entropy bound on [1,50]: {:?}",
            b.iter().map(|r| r.min_entropy_margin).collect::<Vec<_>>()
        ),
    ));

    Ok(TensionAuditReport {
        tension: base.clone(),
        hypotheses,
        truncated,
        mollified,
        convergence_ks: CONVERGENCE_KS.to_vec(),
        sup_errors,
        ledger,
    })
}
