use serde::Serialize;

use super::{Mode, RegularizedTension};
use crate::error::{Error, Result};
use crate::tension::FreeEnergy;

#[derive(Debug, Clone, Serialize)]
pub struct BoundSample {
    pub s: f64,
    pub slope: f64,
    /// `σ_k'(s) + (2 + σ0)`.
    pub lower_margin: f64,
    pub negative: bool,
    /// `−σ_k'(s)(1+s)^θ(1+ks)/(ks)`; absent at `s = 0`.
    pub c2_ratio: Option<f64>,
    pub g: f64,
    /// `g_k(s)/(1 + s²)`.
    pub c1_ratio: f64,
    /// `(2+σ0)(s ln s − s + 1) − g_k(s)`, for `s ∈ [1, 50]`.
    pub entropy_margin: Option<f64>,
}

/// Outcome of the bound audit for a mollified tension.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub k: u32,
    pub samples: Vec<BoundSample>,
    pub min_lower_margin: f64,
    /// First sampled `s` where the lower slope bound fails, if any.
    pub lower_bound_first_failure: Option<f64>,
    /// Where the outer linear branch crosses `−(2+σ0)`:
    /// `k^{1+θ}(2 + σ0 + σ'(k))`.
    pub outer_branch_crossing: f64,
    pub all_negative: bool,
    pub fitted_c2: f64,
    pub fitted_c1: f64,
    pub min_g: f64,
    pub min_entropy_margin: f64,
    pub lower_ok: bool,
    pub c1_ok: bool,
    pub c2_ok: bool,
    pub entropy_ok: bool,
    pub pass: bool,
}

/// Tolerance on the entropy-type upper bound of `g_k`.
const ENTROPY_TOL: f64 = 1e-8;

impl RegularizedTension {
    /// Free energy `g_k` of this tension, tabulated up to `s_max`.
    pub fn free_energy(&self, s_max: f64, tol: f64) -> Result<FreeEnergy> {
        FreeEnergy::build(self, s_max, tol)
    }

    /// Checks the slope and free-energy bounds of the mollified ladder at
    /// every sample.
    pub fn audit_prop_bounds(&self, samples: &[f64]) -> Result<BoundReport> {
        if self.mode != Mode::Mollified {
            return Err(Error::Argument("bound audit applies to the mollified ladder only".into()));
        }
        if samples.is_empty() {
            return Err(Error::Argument("bound audit needs at least one sample".into()));
        }
        if samples.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Argument("bound samples must be finite and nonnegative".into()));
        }
        let s_top = samples.iter().cloned().fold(2.0, f64::max);
        let g = self.free_energy(s_top * 1.01, 1e-10)?;
        let k = self.k as f64;
        let sigma0 = self.base.sigma0;
        let theta = self.base.theta;

        let mut out = Vec::with_capacity(samples.len());
        for &s in samples {
            let slope = self.sigma_k_prime(s);
            let gs = g.value(s);
            let c2_ratio = (s > 0.0).then(|| -slope * (1.0 + s).powf(theta) * (1.0 + k * s) / (k * s));
            let entropy_margin = (1.0..=50.0).contains(&s).then(|| {
                (2.0 + sigma0) * (s * s.ln() - s + 1.0) - gs
            });
            out.push(BoundSample {
                s,
                slope,
                lower_margin: slope + 2.0 + sigma0,
                negative: s == 0.0 || slope < 0.0,
                c2_ratio,
                g: gs,
                c1_ratio: gs / (1.0 + s * s),
                entropy_margin,
            });
        }
        let min_lower_margin = out.iter().map(|e| e.lower_margin).fold(f64::INFINITY, f64::min);
        let lower_bound_first_failure = out
            .iter()
            .filter(|e| e.lower_margin < 0.0)
            .map(|e| e.s)
            .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))));
        let fitted_c2 = out
            .iter()
            .filter_map(|e| e.c2_ratio)
            .fold(f64::INFINITY, f64::min);
        let fitted_c1 = out.iter().map(|e| e.c1_ratio).fold(0.0, f64::max);
        let min_g = out.iter().map(|e| e.g).fold(f64::INFINITY, f64::min);
        let min_entropy_margin = out
            .iter()
            .filter_map(|e| e.entropy_margin)
            .fold(f64::INFINITY, f64::min);
        let all_negative = out.iter().all(|e| e.negative);
        let lower_ok = min_lower_margin >= 0.0;
        let c2_ok = fitted_c2 > 0.0 && fitted_c2.is_finite();
        let c1_ok = fitted_c1 > 0.0 && min_g >= -1e-10;
        let entropy_ok = min_entropy_margin >= -ENTROPY_TOL;
        Ok(BoundReport {
            k: self.k,
            outer_branch_crossing: k.powf(1.0 + theta) * (2.0 + sigma0 + self.base_slope(k)),
            samples: out,
            min_lower_margin,
            lower_bound_first_failure,
            all_negative,
            fitted_c2,
            fitted_c1,
            min_g,
            min_entropy_margin,
            lower_ok,
            c1_ok,
            c2_ok,
            entropy_ok,
            pass: lower_ok && all_negative && c1_ok && c2_ok && entropy_ok,
        })
    }
}
