//! Surface-tension families, their derivatives, and hypothesis audits.
//!
//! Every family is normalized so that `σ(1) = 0`. The closed-form families are
//!
//! * `σ_β(s) = (β+1) [1 − s + ((β+1)/β)^{1/3} s]^{-3} − β` for `β ∈ (0, ∞)`,
//! * `σ_∞(s) = 1 − s`, the `β → ∞` limit,
//! * `σ_c(s) = (1 − s³)/3`, a reference family with `σ'(s) = −s²` whose free
//!   energy has the quadratic growth assumed by the classical existence theory.
//!
//! A tabulated family interpolates `(s, σ(s))` samples with a monotone cubic.

mod free_energy;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{hermite, locate, monotone_slopes};

pub use free_energy::{ClosedForm, EnergyBoundReport, FreeEnergy, DEFAULT_FLOOR};

/// A differentiable surface tension `s ↦ σ(s)`.
///
/// `value`/`slope` are total: arguments outside the natural domain use the
/// extension documented by the implementor.
pub trait Tension: Send + Sync + std::fmt::Debug {
    fn value(&self, s: f64) -> f64;
    fn slope(&self, s: f64) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    SigmaBeta { beta: f64 },
    SigmaInfty,
    CubicDecay,
    Tabulated(Table),
}

/// Monotone-cubic interpolant of tabulated `(s, σ(s))` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    s: Vec<f64>,
    sigma: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl Table {
    /// Builds the interpolant. The data are shifted so that the interpolant
    /// vanishes at `s = 1`, which must lie inside the tabulated range.
    pub fn new(s: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if s.len() < 2 || s.len() != sigma.len() {
            return Err(Error::Argument(format!(
                "tabulated tension needs at least two (s, σ) pairs, got {} s and {} σ",
                s.len(),
                sigma.len()
            )));
        }
        if s.iter().chain(&sigma).any(|v| !v.is_finite()) {
            return Err(Error::Argument("tabulated tension has non-finite entries".into()));
        }
        if s[0] < 0.0 {
            return Err(Error::Argument("tabulated tension starts at negative s".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("tabulated s values must be strictly increasing".into()));
        }
        if !(s[0] <= 1.0 && 1.0 <= s[s.len() - 1]) {
            return Err(Error::Argument("tabulated range must contain s = 1".into()));
        }
        let slopes = monotone_slopes(&s, &sigma);
        let mut table = Self { s, sigma, slopes };
        let shift = table.eval(1.0).0;
        for v in &mut table.sigma {
            *v -= shift;
        }
        Ok(table)
    }

    /// Loads a two-column CSV `(s, σ(s))`. A non-numeric first row is treated as a header.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let csv_err = |message: String| Error::Csv {
            path: path.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| csv_err(e.to_string()))?;
        let mut s = Vec::new();
        let mut sigma = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_err(e.to_string()))?;
            if record.len() != 2 {
                return Err(csv_err(format!("row {row}: expected 2 columns, found {}", record.len())));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(v) => {
                    s.push(v[0]);
                    sigma.push(v[1]);
                }
                Err(_) if row == 0 => continue,
                Err(e) => return Err(csv_err(format!("row {row}: {e}"))),
            }
        }
        Self::new(s, sigma)
    }

    fn ensure_slopes(&self) -> std::borrow::Cow<'_, [f64]> {
        if self.slopes.len() == self.s.len() {
            std::borrow::Cow::Borrowed(&self.slopes)
        } else {
            std::borrow::Cow::Owned(monotone_slopes(&self.s, &self.sigma))
        }
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let slopes = self.ensure_slopes();
        let n = self.s.len();
        if x < self.s[0] {
            let d = slopes[0];
            return (self.sigma[0] + d * (x - self.s[0]), d);
        }
        if x > self.s[n - 1] {
            let d = slopes[n - 1];
            return (self.sigma[n - 1] + d * (x - self.s[n - 1]), d);
        }
        let i = locate(&self.s, x);
        let (v, d, _) = hermite(
            self.s[i],
            self.s[i + 1],
            self.sigma[i],
            self.sigma[i + 1],
            slopes[i],
            slopes[i + 1],
            x,
        );
        (v, d)
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// A surface-tension family together with the constants `σ0`, `σ1`, `θ` it is
/// audited against: `−σ0 < σ'(s) ≤ −σ1/(1+s^θ)` for `s ≥ 1` and
/// `−σ0 < σ'(s) < 0` on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTension {
    pub family: Family,
    pub sigma0: f64,
    pub sigma1: f64,
    pub theta: f64,
}

impl SurfaceTension {
    pub fn new(family: Family, sigma0: f64, sigma1: f64, theta: f64) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::Argument(format!("sigma0 must be positive, got {sigma0}")));
        }
        if !(sigma1 > 0.0 && sigma1.is_finite()) {
            return Err(Error::Argument(format!("sigma1 must be positive, got {sigma1}")));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::Argument(format!("theta must lie in [0, 1), got {theta}")));
        }
        if let Family::SigmaBeta { beta } = family {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::Argument(format!("beta must be positive, got {beta}")));
            }
        }
        Ok(Self {
            family,
            sigma0,
            sigma1,
            theta,
        })
    }

    /// `σ_∞` with `σ0 = 2`, `σ1 = 1`, `θ = 0`.
    pub fn sigma_infty() -> Self {
        Self {
            family: Family::SigmaInfty,
            sigma0: 2.0,
            sigma1: 1.0,
            theta: 0.0,
        }
    }

    pub fn sigma_beta(beta: f64, sigma0: f64, sigma1: f64, theta: f64) -> Result<Self> {
        Self::new(Family::SigmaBeta { beta }, sigma0, sigma1, theta)
    }

    pub fn cubic_decay() -> Self {
        Self {
            family: Family::CubicDecay,
            sigma0: 2.0,
            sigma1: 1.0,
            theta: 0.0,
        }
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        if s.is_nan() {
            return Err(Error::Domain("surface tension evaluated at NaN".into()));
        }
        if s < 0.0 {
            return Err(Error::Domain(format!(
                "surface tension evaluated at negative concentration {s}"
            )));
        }
        Ok(())
    }

    /// `σ(s)` for `s ≥ 0`.
    pub fn sigma_eval(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.raw_value(s))
    }

    /// `σ'(s)` for `s ≥ 0`; at `s = 0` the one-sided derivative.
    pub fn sigma_prime(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        Ok(self.raw_slope(s))
    }

    /// `g''(s) = −σ'(s)/s`, singular at `s = 0`.
    pub fn free_energy_second(&self, s: f64) -> Result<f64> {
        self.check_domain(s)?;
        if s == 0.0 {
            return Err(Error::Domain("g'' is singular at s = 0".into()));
        }
        Ok(-self.raw_slope(s) / s)
    }

    fn raw_value(&self, s: f64) -> f64 {
        match &self.family {
            Family::SigmaInfty => 1.0 - s,
            Family::SigmaBeta { beta } => {
                let c = ((beta + 1.0) / beta).cbrt();
                let bracket = 1.0 + (c - 1.0) * s;
                (beta + 1.0) / (bracket * bracket * bracket) - beta
            }
            Family::CubicDecay => (1.0 - s * s * s) / 3.0,
            Family::Tabulated(table) => table.eval(s).0,
        }
    }

    fn raw_slope(&self, s: f64) -> f64 {
        match &self.family {
            Family::SigmaInfty => -1.0,
            Family::SigmaBeta { beta } => {
                let c = ((beta + 1.0) / beta).cbrt();
                let bracket = 1.0 + (c - 1.0) * s;
                let b2 = bracket * bracket;
                -3.0 * (beta + 1.0) * (c - 1.0) / (b2 * b2)
            }
            Family::CubicDecay => -s * s,
            Family::Tabulated(table) => table.eval(s).1,
        }
    }

    /// Free energy of this family; closed forms are attached where known.
    pub fn free_energy_build(&self, s_max: f64, tol: f64) -> Result<FreeEnergy> {
        let closed = match self.family {
            Family::SigmaInfty => Some(ClosedForm::Entropy),
            Family::CubicDecay => Some(ClosedForm::Cubic),
            _ => None,
        };
        FreeEnergy::build_with(self, s_max, tol, closed)
    }

    /// Checks both inequalities of the slope hypothesis at every sample.
    pub fn audit_hypotheses(&self, samples: &[f64]) -> Result<HypothesisReport> {
        if samples.is_empty() {
            return Err(Error::Argument("hypothesis audit needs at least one sample".into()));
        }
        let mut entries = Vec::with_capacity(samples.len());
        for &s in samples {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Argument(format!(
                    "hypothesis samples must be positive and finite, got {s}"
                )));
            }
            let d = self.raw_slope(s);
            let lower_margin = d + self.sigma0;
            let upper_bound = if s >= 1.0 {
                -self.sigma1 / (1.0 + s.powf(self.theta))
            } else {
                0.0
            };
            let upper_margin = upper_bound - d;
            let upper_ok = if s >= 1.0 {
                upper_margin >= 0.0
            } else {
                upper_margin > 0.0
            };
            entries.push(HypothesisSample {
                s,
                slope: d,
                lower_ok: lower_margin > 0.0,
                upper_ok,
                lower_margin,
                upper_margin,
            });
        }
        let worst_margin = entries
            .iter()
            .map(|e| e.lower_margin.min(e.upper_margin))
            .fold(f64::INFINITY, f64::min);
        let pass = entries.iter().all(|e| e.lower_ok && e.upper_ok);
        Ok(HypothesisReport {
            samples: entries,
            worst_margin,
            pass,
        })
    }
}

impl Tension for SurfaceTension {
    /// Negative arguments use the tangent extension at `s = 0`.
    fn value(&self, s: f64) -> f64 {
        if s < 0.0 {
            self.raw_value(0.0) + self.raw_slope(0.0) * s
        } else {
            self.raw_value(s)
        }
    }

    fn slope(&self, s: f64) -> f64 {
        self.raw_slope(s.max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisSample {
    pub s: f64,
    pub slope: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub samples: Vec<HypothesisSample>,
    pub worst_margin: f64,
    pub pass: bool,
}
