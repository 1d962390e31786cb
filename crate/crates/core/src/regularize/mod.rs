//! Approximation ladders for the surface tension.
//!
//! * Truncation: `σ_k(s) = ∫_1^s T_k(σ'(r)) dr` with `T_k = k T(·/k)` and the
//!   truncated identity `τ_k(s) = s σ_k'(s)/σ'(s)`.
//! * Mollification: `σ_k' = χ_{1/k²} * σ̃_k'`, where `σ̃_k'` is linear below
//!   `1/k`, equal to `σ'` on `[1/k, k]` and decreasing linearly beyond `k`.

mod audit;
mod mollifier;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::locate;
use crate::quadrature::adaptive_simpson;
use crate::tension::{SurfaceTension, Tension};

pub use audit::{BoundReport, BoundSample};
pub use mollifier::{bump_normalization, convolve, mollifier_eval};

/// Largest admissible mollification index.
pub const MAX_K: u32 = 1 << 20;

/// `T`: identity on `(−1, 1)`, ramps back to zero on `1 ≤ |s| ≤ 2`, odd.
pub fn trunc_t(s: f64) -> f64 {
    let a = s.abs();
    let v = if a < 1.0 {
        a
    } else if a <= 2.0 {
        2.0 - a
    } else {
        0.0
    };
    v.copysign(s)
}

/// `T_k(s) = k T(s/k)`.
pub fn trunc_tk(k: u32, s: f64) -> f64 {
    let k = k as f64;
    if s.abs() < k {
        return s;
    }
    k * trunc_t(s / k)
}

/// `a_i(h) = max(0, h)^i / i` for `i ∈ {1, 2, 3}`.
///
/// # Panics
/// If `i` is not 1, 2 or 3.
pub fn mobility(i: u32, h: f64) -> f64 {
    let p = h.max(0.0);
    match i {
        1 => p,
        2 => 0.5 * p * p,
        3 => p * p * p / 3.0,
        _ => panic!("mobility index must be 1, 2 or 3, got {i}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Truncated,
    Mollified,
}

/// Regularized tension `σ_k` of either ladder.
#[derive(Debug, Clone)]
pub struct RegularizedTension {
    base: SurfaceTension,
    k: u32,
    mode: Mode,
    s_k: f64,
    /// Truncated mode: `(s, σ_k(s))` anchors for short quadratures.
    anchors: Vec<f64>,
    anchor_values: Vec<f64>,
    /// Mollified mode: `(χ_ε * Σ̃)(1)`, subtracted so that `σ_k(1) = 0`.
    shift: f64,
}

const ANCHOR_TOL: f64 = 1e-12;
const SK_SEARCH_MAX: f64 = 1e8;

impl RegularizedTension {
    pub fn truncated(base: SurfaceTension, k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::Argument("truncation index k must be at least 1".into()));
        }
        let mut r = Self {
            base,
            k,
            mode: Mode::Truncated,
            s_k: 0.0,
            anchors: Vec::new(),
            anchor_values: Vec::new(),
            shift: 0.0,
        };
        r.s_k = r.find_s_k();
        r.build_anchors()?;
        Ok(r)
    }

    pub fn mollified(base: SurfaceTension, k: u32) -> Result<Self> {
        if !(4..=MAX_K).contains(&k) {
            return Err(Error::Argument(format!(
                "mollification index k must lie in [4, {MAX_K}], got {k}"
            )));
        }
        let mut r = Self {
            base,
            k,
            mode: Mode::Mollified,
            s_k: f64::INFINITY,
            anchors: Vec::new(),
            anchor_values: Vec::new(),
            shift: 0.0,
        };
        r.shift = r.smoothed_antiderivative(1.0);
        Ok(r)
    }

    pub fn new(base: SurfaceTension, k: u32, mode: Mode) -> Result<Self> {
        match mode {
            Mode::Truncated => Self::truncated(base, k),
            Mode::Mollified => Self::mollified(base, k),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn base(&self) -> &SurfaceTension {
        &self.base
    }

    /// Mollifier width `1/k²`.
    pub fn epsilon(&self) -> f64 {
        let k = self.k as f64;
        1.0 / (k * k)
    }

    /// Truncated mode: largest `s` with `|σ'| ≤ k` on `[0, s]` (infinite when
    /// the bound never fails). Mollified mode: infinite.
    pub fn s_k(&self) -> f64 {
        self.s_k
    }

    fn base_slope(&self, s: f64) -> f64 {
        self.base.slope(s.max(0.0))
    }

    fn find_s_k(&self) -> f64 {
        let k = self.k as f64;
        let ok = |s: f64| self.base_slope(s).abs() <= k;
        if !ok(0.0) {
            return 0.0;
        }
        // Bracket the first failure on a doubling grid, then bisect.
        let mut lo = 0.0;
        let mut hi = 1.0;
        while ok(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > SK_SEARCH_MAX {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn truncated_slope(&self, s: f64) -> f64 {
        trunc_tk(self.k, self.base_slope(s))
    }

    fn build_anchors(&mut self) -> Result<()> {
        let mut nodes: Vec<f64> = (0..=256).map(|i| i as f64 * 0.25).collect();
        while *nodes.last().unwrap() < 1e6 {
            let next = nodes.last().unwrap() * 1.25;
            nodes.push(next);
        }
        let one = nodes.iter().position(|&s| s == 1.0).unwrap();
        let mut values = vec![0.0; nodes.len()];
        for i in (0..one).rev() {
            values[i] = values[i + 1]
                - adaptive_simpson(|r| self.truncated_slope(r), nodes[i], nodes[i + 1], ANCHOR_TOL)?;
        }
        for i in one + 1..nodes.len() {
            values[i] = values[i - 1]
                + adaptive_simpson(|r| self.truncated_slope(r), nodes[i - 1], nodes[i], ANCHOR_TOL)?;
        }
        self.anchors = nodes;
        self.anchor_values = values;
        Ok(())
    }

    /// `σ̃_k'(s)`.
    pub fn sigma_tilde_prime(&self, s: f64) -> f64 {
        let k = self.k as f64;
        let inv = 1.0 / k;
        if s < inv {
            (k * self.base_slope(inv) - k) * s
        } else if s <= k {
            self.base_slope(s)
        } else {
            self.base_slope(k) - s / k.powf(1.0 + self.base.theta)
        }
    }

    /// Continuous antiderivative `Σ̃` of `σ̃_k'` with `Σ̃(1) = 0`.
    pub fn sigma_tilde(&self, s: f64) -> f64 {
        let k = self.k as f64;
        let inv = 1.0 / k;
        if s < inv {
            let a = k * self.base_slope(inv) - k;
            self.base.value(inv) + 0.5 * a * (s * s - inv * inv)
        } else if s <= k {
            self.base.value(s)
        } else {
            let c = k.powf(1.0 + self.base.theta);
            self.base.value(k) + self.base_slope(k) * (s - k) - 0.5 * (s * s - k * k) / c
        }
    }

    fn breaks(&self) -> [f64; 2] {
        let k = self.k as f64;
        [1.0 / k, k]
    }

    fn smoothed_antiderivative(&self, s: f64) -> f64 {
        convolve(|x| self.sigma_tilde(x), s, self.epsilon(), &self.breaks())
    }

    /// `σ_k(s)`; defined on all of ℝ.
    pub fn sigma_k(&self, s: f64) -> Result<f64> {
        if s.is_nan() {
            return Err(Error::Domain("regularized tension evaluated at NaN".into()));
        }
        match self.mode {
            Mode::Truncated => {
                if s <= 0.0 {
                    return Ok(self.anchor_values[0] + self.truncated_slope(0.0) * s);
                }
                let i = locate(&self.anchors, s);
                let a = self.anchors[i];
                Ok(self.anchor_values[i]
                    + adaptive_simpson(|r| self.truncated_slope(r), a, s, ANCHOR_TOL)?)
            }
            Mode::Mollified => Ok(self.smoothed_antiderivative(s) - self.shift),
        }
    }

    /// `σ_k'(s)`.
    pub fn sigma_k_prime(&self, s: f64) -> f64 {
        match self.mode {
            Mode::Truncated => self.truncated_slope(s),
            Mode::Mollified => {
                convolve(|x| self.sigma_tilde_prime(x), s, self.epsilon(), &self.breaks())
            }
        }
    }

    /// Truncated identity `τ_k(s) = s σ_k'(s)/σ'(s)`; `τ_k(0) = 0`.
    ///
    /// The mollified ladder carries no truncation of the identity, so there
    /// `τ_k(s) = s`.
    pub fn tau_k(&self, s: f64) -> Result<f64> {
        if s == 0.0 || self.mode == Mode::Mollified {
            return Ok(s);
        }
        let d = self.base_slope(s);
        if d == 0.0 {
            return Err(Error::Domain(format!(
                "τ_k undefined at s = {s}: σ'(s) = 0 violates the slope hypothesis"
            )));
        }
        if d.abs() < self.k as f64 {
            return Ok(s);
        }
        Ok(s * trunc_tk(self.k, d) / d)
    }

    /// Analytic branch of `σ_k'` outside the blend zone, if `s` lies there.
    pub fn branch_prime(&self, s: f64) -> Option<f64> {
        let k = self.k as f64;
        let eps = self.epsilon();
        if s <= (k - 1.0) / (k * k) {
            Some((k * self.base_slope(1.0 / k) - k) * s)
        } else if s >= k + eps {
            Some(self.base_slope(k) - s / k.powf(1.0 + self.base.theta))
        } else {
            None
        }
    }
}

impl Tension for RegularizedTension {
    /// Quadrature failures surface as NaN.
    fn value(&self, s: f64) -> f64 {
        self.sigma_k(s).unwrap_or(f64::NAN)
    }

    fn slope(&self, s: f64) -> f64 {
        self.sigma_k_prime(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tension::Family;

    #[test]
    fn truncation_values() {
        assert_eq!(trunc_t(0.5), 0.5);
        assert_eq!(trunc_t(1.5), 0.5);
        assert_eq!(trunc_t(3.0), 0.0);
        assert_eq!(trunc_t(-1.5), -0.5);
        assert_eq!(trunc_tk(2, 1.0), 1.0);
        assert_eq!(trunc_tk(2, 3.0), 1.0);
        assert_eq!(trunc_tk(2, 5.0), 0.0);
    }

    #[test]
    fn mobility_values() {
        assert_eq!(mobility(2, 2.0), 2.0);
        assert_eq!(mobility(3, 3.0), 9.0);
        assert_eq!(mobility(1, -1.0), 0.0);
    }

    #[test]
    fn truncated_sigma_infty_is_unchanged() {
        for k in [1, 2, 5] {
            let r = RegularizedTension::truncated(SurfaceTension::sigma_infty(), k).unwrap();
            assert!((r.sigma_k(3.0).unwrap() + 2.0).abs() < 1e-10);
            assert_eq!(r.sigma_k(1.0).unwrap(), 0.0);
            assert_eq!(r.s_k(), f64::INFINITY);
            assert_eq!(r.tau_k(2.0).unwrap(), 2.0);
        }
    }

    #[test]
    fn truncated_cubic_matches_riemann_sum() {
        let r = RegularizedTension::truncated(SurfaceTension::cubic_decay(), 2).unwrap();
        let h = 1e-5;
        let n = (2.0 / h) as usize;
        let riemann: f64 = (0..n)
            .map(|i| trunc_tk(2, -(1.0 + (i as f64 + 0.5) * h).powi(2)) * h)
            .sum();
        assert!((r.sigma_k(3.0).unwrap() - riemann).abs() < 1e-6);
        assert_eq!(r.tau_k(3.0).unwrap(), 0.0);
        assert!((r.s_k() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tau_rejects_flat_tension() {
        let flat = crate::tension::Table::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 0.0]).unwrap();
        let t = SurfaceTension::new(Family::Tabulated(flat), 1.0, 1.0, 0.0).unwrap();
        let r = RegularizedTension::truncated(t, 2).unwrap();
        assert!(r.tau_k(0.5).is_err());
        assert_eq!(r.tau_k(0.0).unwrap(), 0.0);
    }

    #[test]
    fn sigma_tilde_branches() {
        let r = RegularizedTension::mollified(SurfaceTension::sigma_infty(), 4).unwrap();
        assert!((r.sigma_tilde_prime(0.1) + 0.8).abs() < 1e-15);
        assert_eq!(r.sigma_tilde_prime(2.0), -1.0);
        assert_eq!(r.sigma_tilde_prime(8.0), -3.0);
        // Σ̃ is continuous across both kinks and Σ̃(0) = σ(0) for σ_∞.
        for b in [0.25, 4.0] {
            assert!((r.sigma_tilde(b - 1e-12) - r.sigma_tilde(b + 1e-12)).abs() < 1e-10);
        }
        assert!((r.sigma_tilde(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mollified_examples() {
        let r = RegularizedTension::mollified(SurfaceTension::sigma_infty(), 4).unwrap();
        assert!((r.sigma_k_prime(3.0 / 64.0) + 0.375).abs() < 1e-12);
        assert!((r.sigma_k_prime(10.0) + 3.5).abs() < 1e-12);
        assert!(r.sigma_k(1.0).unwrap().abs() < 1e-15);
        let r8 = RegularizedTension::mollified(SurfaceTension::sigma_infty(), 8).unwrap();
        assert!((r8.sigma_k(0.0).unwrap() - 1.0).abs() < 0.2);
        assert!(RegularizedTension::mollified(SurfaceTension::sigma_infty(), 3).is_err());
        assert!(RegularizedTension::mollified(SurfaceTension::sigma_infty(), MAX_K + 1).is_err());
    }

    #[test]
    fn mollified_value_differentiates_to_slope() {
        let r = RegularizedTension::mollified(SurfaceTension::sigma_infty(), 6).unwrap();
        for s in [0.01, 1.0 / 6.0, 0.2, 1.3, 6.0, 6.02, 9.0] {
            let h = 1e-6;
            let fd = (r.sigma_k(s + h).unwrap() - r.sigma_k(s - h).unwrap()) / (2.0 * h);
            assert!((fd - r.sigma_k_prime(s)).abs() < 1e-6, "s={s}: {fd} vs {}", r.sigma_k_prime(s));
        }
    }
}
