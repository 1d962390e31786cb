//! Strict TOML experiment configuration.
//!
//! ```toml
//! scenario = "S1_drop"          # S1_drop | S2_surfactant_pulse | MMS | custom
//! n = 128
//! seed = 0
//! reg_mode = "mollified"        # used when solver.k > 0
//!
//! [tension]
//! family = "sigma_infty"        # sigma_infty | sigma_beta | cubic_decay | tabulated
//!
//! [solver]
//! D = 0.1
//! k = 0
//! t_end = 0.01
//!
//! [experiment]
//! kind = "single"               # single | k_sweep | refine | order_study
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularize::MAX_K;
use crate::solver::{ModelMode, SolverConfig, DEFAULT_ENERGY_RANGE};
use crate::tension::{Family, SurfaceTension, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "S1_drop")]
    S1Drop,
    #[serde(rename = "S2_surfactant_pulse")]
    S2SurfactantPulse,
    #[serde(rename = "MMS")]
    Mms,
    #[serde(rename = "custom")]
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegMode {
    Truncated,
    Mollified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    SigmaInfty,
    SigmaBeta,
    CubicDecay,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionConfig {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Two-column `(s, σ)` CSV for the tabulated family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

impl Default for TensionConfig {
    fn default() -> Self {
        Self {
            family: FamilyName::SigmaInfty,
            beta: None,
            sigma0: None,
            sigma1: None,
            theta: None,
            table: None,
        }
    }
}

impl TensionConfig {
    /// Builds the tension; relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<SurfaceTension> {
        let wrap = |e: Error| match e {
            Error::Argument(m) => Error::config("tension", m),
            other => other,
        };
        let family = match self.family {
            FamilyName::SigmaInfty => Family::SigmaInfty,
            FamilyName::CubicDecay => Family::CubicDecay,
            FamilyName::SigmaBeta => Family::SigmaBeta {
                beta: self
                    .beta
                    .ok_or_else(|| Error::config("tension.beta", "required for sigma_beta"))?,
            },
            FamilyName::Tabulated => {
                let rel = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::config("tension.table", "required for tabulated"))?;
                Family::Tabulated(Table::from_csv(base_dir.join(rel))?)
            }
        };
        if self.family != FamilyName::SigmaBeta && self.beta.is_some() {
            return Err(Error::config("tension.beta", "only valid for sigma_beta"));
        }
        if self.family != FamilyName::Tabulated && self.table.is_some() {
            return Err(Error::config("tension.table", "only valid for tabulated"));
        }
        let d = SurfaceTension::sigma_infty();
        SurfaceTension::new(
            family,
            self.sigma0.unwrap_or(d.sigma0),
            self.sigma1.unwrap_or(d.sigma1),
            self.theta.unwrap_or(d.theta),
        )
        .map_err(wrap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Single {},
    KSweep {
        #[serde(default = "default_ks")]
        ks: Vec<i64>,
    },
    Refine {
        #[serde(default = "default_refine_ns")]
        ns: Vec<i64>,
        #[serde(default = "default_refine_dts")]
        dts: Vec<f64>,
        #[serde(default = "default_basis")]
        basis_size: usize,
    },
    OrderStudy {
        #[serde(default = "default_order_ns")]
        ns: Vec<i64>,
        /// `dt = dt_factor · dx²`.
        #[serde(default = "default_dt_factor")]
        dt_factor: f64,
    },
}

fn default_ks() -> Vec<i64> {
    vec![8, 16, 32]
}
fn default_refine_ns() -> Vec<i64> {
    vec![32, 64, 128]
}
fn default_refine_dts() -> Vec<f64> {
    vec![4e-4, 2e-4, 1e-4]
}
fn default_basis() -> usize {
    5
}
fn default_order_ns() -> Vec<i64> {
    vec![32, 64, 128, 256]
}
fn default_dt_factor() -> f64 {
    0.5
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment::Single {}
    }
}

/// Raw document; integers are signed so that range errors name their key.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    #[serde(default)]
    initial_data: Option<PathBuf>,
    #[serde(default)]
    n: Option<i64>,
    #[serde(default)]
    seed: Option<i64>,
    #[serde(default)]
    reg_mode: Option<RegMode>,
    #[serde(default)]
    energy_range: Option<f64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    tension: TensionConfig,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    experiment: Experiment,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(rename = "D")]
    d: Option<f64>,
    k: Option<i64>,
    dt_init: Option<f64>,
    dt_min: Option<f64>,
    dt_max: Option<f64>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<i64>,
    scheme: Option<crate::solver::Scheme>,
    gamma_transport: Option<crate::solver::GammaTransport>,
    t_end: Option<f64>,
    cfl: Option<f64>,
    growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_data: Option<PathBuf>,
    pub n: usize,
    pub seed: u64,
    pub reg_mode: RegMode,
    /// Upper end of the tabulated free energy.
    pub energy_range: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub tension: TensionConfig,
    pub solver: SolverConfig,
    pub experiment: Experiment,
    /// Directory relative paths in the document resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::S1Drop,
            initial_data: None,
            n: 128,
            seed: 0,
            reg_mode: RegMode::Mollified,
            energy_range: DEFAULT_ENERGY_RANGE,
            output_dir: None,
            tension: TensionConfig::default(),
            solver: SolverConfig::default(),
            experiment: Experiment::Single {},
            base_dir: PathBuf::from("."),
        }
    }
}

fn non_negative(key: &str, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::config(key, format!("must be nonnegative, got {v}")))
}

fn check_k(key: &str, k: i64) -> Result<u32> {
    let k = non_negative(key, k)?;
    if k > MAX_K as u64 {
        return Err(Error::config(key, format!("must not exceed {MAX_K}, got {k}")));
    }
    Ok(k as u32)
}

fn check_n(key: &str, n: i64) -> Result<usize> {
    let n = non_negative(key, n)?;
    if n < 8 {
        return Err(Error::config(key, format!("needs at least 8 cells, got {n}")));
    }
    Ok(n as usize)
}

/// Parses and validates a TOML experiment document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let key = e.message().split('`').nth(1).unwrap_or("document").to_string();
        Error::config(key, e.to_string().trim_end().to_string())
    })?;
    let d = ExperimentConfig::default();
    let mut solver = SolverConfig::default();
    let s = raw.solver;
    if let Some(v) = s.d {
        solver.d = v;
    }
    if let Some(v) = s.k {
        solver.k = check_k("solver.k", v)?;
    }
    solver.dt_init = s.dt_init.unwrap_or(solver.dt_init);
    solver.dt_min = s.dt_min.unwrap_or(solver.dt_min);
    solver.dt_max = s.dt_max.unwrap_or(solver.dt_max);
    solver.newton_tol = s.newton_tol.unwrap_or(solver.newton_tol);
    if let Some(v) = s.newton_max_iter {
        solver.newton_max_iter = non_negative("solver.newton_max_iter", v)? as usize;
    }
    solver.scheme = s.scheme.unwrap_or(solver.scheme);
    solver.gamma_transport = s.gamma_transport.unwrap_or(solver.gamma_transport);
    solver.t_end = s.t_end.unwrap_or(solver.t_end);
    solver.cfl = s.cfl.unwrap_or(solver.cfl);
    solver.growth = s.growth.unwrap_or(solver.growth);
    solver.validate().map_err(|e| match e {
        Error::Config { key, message } => Error::config(format!("solver.{key}"), message),
        other => other,
    })?;

    let cfg = ExperimentConfig {
        scenario: raw.scenario,
        initial_data: raw.initial_data,
        n: raw.n.map(|n| check_n("n", n)).transpose()?.unwrap_or(d.n),
        seed: raw.seed.map(|s| non_negative("seed", s)).transpose()?.unwrap_or(d.seed),
        reg_mode: raw.reg_mode.unwrap_or(d.reg_mode),
        energy_range: raw.energy_range.unwrap_or(d.energy_range),
        output_dir: raw.output_dir,
        tension: raw.tension,
        solver,
        experiment: raw.experiment,
        base_dir: d.base_dir,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file; relative paths inside resolve against its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_range >= 2.0 && self.energy_range.is_finite()) {
            return Err(Error::config(
                "energy_range",
                format!("must be at least 2, got {}", self.energy_range),
            ));
        }
        if (self.scenario == Scenario::Custom) != self.initial_data.is_some() {
            return Err(Error::config(
                "initial_data",
                "required for the custom scenario and only allowed there",
            ));
        }
        if self.scenario == Scenario::Mms && self.solver.k != 0 {
            return Err(Error::config("solver.k", "the manufactured problem runs in physical mode (k = 0)"));
        }
        if self.solver.k > 0 && self.reg_mode == RegMode::Mollified && self.solver.k < 4 {
            return Err(Error::config("solver.k", format!("mollified mode needs k ≥ 4, got {}", self.solver.k)));
        }
        match &self.experiment {
            Experiment::Single {} => {}
            Experiment::KSweep { ks } => {
                if ks.is_empty() {
                    return Err(Error::config("experiment.ks", "must not be empty"));
                }
                let mut prev = 3;
                for &k in ks {
                    let k = check_k("experiment.ks", k)? as i64;
                    if k <= prev {
                        return Err(Error::config(
                            "experiment.ks",
                            "must be strictly increasing with every k ≥ 4",
                        ));
                    }
                    prev = k;
                }
            }
            Experiment::Refine { ns, dts, basis_size } => {
                if ns.is_empty() || ns.len() != dts.len() {
                    return Err(Error::config("experiment.dts", "needs one dt per n"));
                }
                for &n in ns {
                    check_n("experiment.ns", n)?;
                }
                if dts.iter().any(|&dt| !(dt > 0.0)) {
                    return Err(Error::config("experiment.dts", "must be positive"));
                }
                if *basis_size == 0 {
                    return Err(Error::config("experiment.basis_size", "must be at least 1"));
                }
            }
            Experiment::OrderStudy { ns, dt_factor } => {
                if ns.len() < 2 {
                    return Err(Error::config("experiment.ns", "needs at least two meshes"));
                }
                for &n in ns {
                    check_n("experiment.ns", n)?;
                }
                if !(*dt_factor > 0.0) {
                    return Err(Error::config("experiment.dt_factor", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Physical for `k = 0`, otherwise the configured ladder.
    pub fn model_mode(&self) -> ModelMode {
        match (self.solver.k, self.reg_mode) {
            (0, _) => ModelMode::Physical,
            (_, RegMode::Truncated) => ModelMode::Truncated,
            (_, RegMode::Mollified) => ModelMode::Mollified,
        }
    }

    pub fn tension(&self) -> Result<SurfaceTension> {
        self.tension.build(&self.base_dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config("scenario = \"S1_drop\"").unwrap();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.solver.d, 0.1);
        assert_eq!(cfg.solver.k, 0);
        assert_eq!(cfg.solver.t_end, 0.01);
        assert_eq!(cfg.tension.family, FamilyName::SigmaInfty);
        assert_eq!(cfg.model_mode(), ModelMode::Physical);
    }

    #[test]
    fn negative_k_names_key() {
        let err = parse_config("scenario = \"S1_drop\"\n[solver]\nk = -1\n").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "solver.k"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(parse_config("scenario = \"S1_drop\"\nn = 64\nn = 32\n").is_err());
    }

    #[test]
    fn unknown_key_named() {
        match parse_config("scenario = \"S1_drop\"\n[solver]\nDD = 1.0\n").unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "DD"),
            e => panic!("unexpected {e}"),
        }
        match parse_config("scenario = \"S1_drop\"\n[experiment]\nkind = \"single\"\nks = [1]\n").unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "ks"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn type_mismatch_rejected() {
        assert!(parse_config("scenario = \"S1_drop\"\nn = \"many\"\n").is_err());
    }

    #[test]
    fn range_checks() {
        assert!(parse_config("scenario = \"S1_drop\"\nn = 4\n").is_err());
        assert!(parse_config("scenario = \"S1_drop\"\n[solver]\nD = -1.0\n").is_err());
        assert!(parse_config("scenario = \"S1_drop\"\n[solver]\nk = 2\n").is_err());
        assert!(parse_config("scenario = \"S1_drop\"\nreg_mode = \"truncated\"\n[solver]\nk = 2\n").is_ok());
        assert!(parse_config("scenario = \"S1_drop\"\n[experiment]\nkind = \"k_sweep\"\nks = [16, 8]\n").is_err());
        assert!(parse_config("scenario = \"custom\"\n").is_err());
    }

    #[test]
    fn experiment_defaults() {
        let cfg = parse_config("scenario = \"S1_drop\"\n[experiment]\nkind = \"k_sweep\"\n").unwrap();
        assert_eq!(cfg.experiment, Experiment::KSweep { ks: vec![8, 16, 32] });
    }
}
