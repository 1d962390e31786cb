use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularize::{Mode, RegularizedTension};
use crate::tension::{FreeEnergy, SurfaceTension, Tension};

/// Which tension drives the flow and which free energy is dissipated.
///
/// * `Physical`: `σ` drives, energy `g_σ`, no mobility floor.
/// * `Truncated`: the truncated `σ_k` and `τ_k` drive, energy `g_σ`, floor `1/k`.
/// * `Mollified`: the mollified `σ_k` drives, energy `g_{σ_k}`, `τ = id`,
///   floor `1/k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelMode {
    Physical,
    Truncated,
    Mollified,
}

/// Manufactured source `(t, x) ↦ (S_h, S_Γ)` added to the right-hand sides.
pub type Source = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Upper end of the free-energy table unless overridden.
pub const DEFAULT_ENERGY_RANGE: f64 = 16.0;
const ENERGY_TOL: f64 = 1e-10;

#[derive(Clone)]
pub struct Model {
    base: SurfaceTension,
    mode: ModelMode,
    k: u32,
    floor: f64,
    energy: Arc<FreeEnergy>,
    energy_tension: Arc<dyn Tension>,
    drive: Arc<dyn Tension>,
    truncation: Option<Arc<RegularizedTension>>,
    drive_is_energy: bool,
    source: Option<Source>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("base", &self.base)
            .field("mode", &self.mode)
            .field("k", &self.k)
            .field("floor", &self.floor)
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl Model {
    pub fn physical(base: SurfaceTension) -> Result<Self> {
        Self::new(base, ModelMode::Physical, 0, DEFAULT_ENERGY_RANGE)
    }

    /// `k` is ignored in physical mode and must be positive otherwise.
    pub fn new(base: SurfaceTension, mode: ModelMode, k: u32, s_max: f64) -> Result<Self> {
        let base_arc: Arc<dyn Tension> = Arc::new(base.clone());
        match mode {
            ModelMode::Physical => {
                let energy = Arc::new(base.free_energy_build(s_max, ENERGY_TOL)?);
                Ok(Self {
                    base,
                    mode,
                    k: 0,
                    floor: 0.0,
                    energy,
                    energy_tension: base_arc.clone(),
                    drive: base_arc,
                    truncation: None,
                    drive_is_energy: true,
                    source: None,
                })
            }
            ModelMode::Truncated => {
                if k == 0 {
                    return Err(Error::Argument("truncated mode needs k ≥ 1".into()));
                }
                let reg = Arc::new(RegularizedTension::new(base.clone(), k, Mode::Truncated)?);
                let energy = Arc::new(base.free_energy_build(s_max, ENERGY_TOL)?);
                Ok(Self {
                    base,
                    mode,
                    k,
                    floor: 1.0 / k as f64,
                    energy,
                    energy_tension: base_arc,
                    drive: reg.clone(),
                    truncation: Some(reg),
                    drive_is_energy: false,
                    source: None,
                })
            }
            ModelMode::Mollified => {
                let reg = Arc::new(RegularizedTension::new(base.clone(), k, Mode::Mollified)?);
                let energy = Arc::new(reg.free_energy(s_max, ENERGY_TOL)?);
                Ok(Self {
                    base,
                    mode,
                    k,
                    floor: 1.0 / k as f64,
                    energy,
                    energy_tension: reg.clone(),
                    drive: reg,
                    truncation: None,
                    drive_is_energy: true,
                    source: None,
                })
            }
        }
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn base(&self) -> &SurfaceTension {
        &self.base
    }

    pub fn mode(&self) -> ModelMode {
        self.mode
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Mobility floor added to `a_3` in the film flux.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn energy(&self) -> &FreeEnergy {
        &self.energy
    }

    pub fn energy_tension(&self) -> &dyn Tension {
        self.energy_tension.as_ref()
    }

    pub fn drive(&self) -> &dyn Tension {
        self.drive.as_ref()
    }

    pub fn drive_is_energy(&self) -> bool {
        self.drive_is_energy
    }

    pub fn source(&self) -> Option<&Source> {
        self.source.as_ref()
    }

    /// Transported surfactant factor of the capillary term: `τ_k` when
    /// truncated, the identity otherwise.
    pub fn tau(&self, s: f64) -> f64 {
        match &self.truncation {
            Some(reg) => reg.tau_k(s).unwrap_or(s),
            None => s,
        }
    }
}
