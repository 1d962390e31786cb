//! Implicit time integration of the (regularized) film/surfactant system.
//!
//! Fluxes live on faces. At face `j` between cells `L = j−1` and `R = j`:
//!
//! ```text
//! F_h = (m3 + 1/k) d3h + m2 dσ
//! F_Γ = m2 τ̄ d3h + m1 Γ̄ dσ − D dΓ
//! ```
//!
//! with arithmetic-mean mobilities `m_i` and `dσ = (σ(Γ_R) − σ(Γ_L))/dx`.
//! The surfactant factors `Γ̄`, `τ̄` are either upwinded or taken as the
//! energy means `Γ̄ = −Δσ_E/Δg'`, `τ̄ = −Δσ/Δg'`, which make the discrete
//! chain rule exact so that backward Euler dissipates the discrete energy.

mod model;

use serde::{Deserialize, Serialize};

use crate::banded::Banded;
use crate::diagnostics::{DiagnosticsRecord, Recorder};
use crate::error::{Error, Result};
use crate::grid::{d3_face, divergence, Field, Mesh};
use crate::newton::{self, Layout, NewtonOptions};
use crate::quadrature::gauss8;
use crate::regularize::mobility;

pub use crate::newton::RejectReason;
pub use model::{Model, ModelMode, Source, DEFAULT_ENERGY_RANGE};

/// Roundoff allowance below zero for accepted states.
pub const NEGATIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FullImplicit,
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaTransport {
    EnergyMean,
    Upwind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    #[serde(rename = "D")]
    pub d: f64,
    pub k: u32,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub scheme: Scheme,
    pub gamma_transport: GammaTransport,
    pub t_end: f64,
    /// Advective CFL number for the semi-implicit scheme.
    pub cfl: f64,
    pub growth: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            d: 0.1,
            k: 0,
            dt_init: 1e-6,
            dt_min: 1e-12,
            dt_max: 1e-4,
            newton_tol: 1e-10,
            newton_max_iter: 30,
            scheme: Scheme::FullImplicit,
            gamma_transport: GammaTransport::EnergyMean,
            t_end: 0.01,
            cfl: 0.4,
            growth: 1.2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(key, msg));
        if !(self.d > 0.0 && self.d.is_finite()) {
            return bad("D", format!("must be positive, got {}", self.d));
        }
        if !(self.dt_min > 0.0) {
            return bad("dt_min", format!("must be positive, got {}", self.dt_min));
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad(
                "dt_init",
                format!(
                    "need dt_min ≤ dt_init ≤ dt_max, got {} ≤ {} ≤ {}",
                    self.dt_min, self.dt_init, self.dt_max
                ),
            );
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol", format!("must be positive, got {}", self.newton_tol));
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter", "must be at least 1".into());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", format!("must be positive, got {}", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl", format!("must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.growth >= 1.0) {
            return bad("growth", format!("must be at least 1, got {}", self.growth));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub h: Field,
    pub gamma: Field,
    pub t: f64,
}

impl GridState {
    pub fn new(h: Field, gamma: Field, t: f64) -> Result<Self> {
        if h.mesh() != gamma.mesh() {
            return Err(Error::Argument("h and Γ live on different meshes".into()));
        }
        Ok(Self { h, gamma, t })
    }

    pub fn mesh(&self) -> &Mesh {
        self.h.mesh()
    }

    fn from_vecs(mesh: Mesh, h: Vec<f64>, gamma: Vec<f64>, t: f64) -> Result<Self> {
        Ok(Self {
            h: Field::new(mesh, h)?,
            gamma: Field::new(mesh, gamma)?,
            t,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepOutcome {
    pub accepted: bool,
    pub newton_iters: usize,
    pub dt_used: f64,
    pub reject_reason: Option<RejectReason>,
    /// Final scaled Newton residual.
    pub residual: f64,
}

/// Per-cell tension data shared by all faces.
pub(crate) struct CellEval {
    pub sig_e: Vec<f64>,
    pub sig_d: Vec<f64>,
    pub dg: Vec<f64>,
    pub tau: Vec<f64>,
}

impl CellEval {
    pub fn new(model: &Model, gamma: &[f64]) -> Self {
        let sig_d: Vec<f64> = gamma.iter().map(|&s| model.drive().value(s)).collect();
        let sig_e = if model.drive_is_energy() {
            sig_d.clone()
        } else {
            gamma.iter().map(|&s| model.energy_tension().value(s)).collect()
        };
        Self {
            sig_e,
            sig_d,
            dg: gamma.iter().map(|&s| model.energy().slope(s)).collect(),
            tau: gamma.iter().map(|&s| model.tau(s)).collect(),
        }
    }
}

/// Relative gap below which the energy means switch to quadrature.
const CLOSE_GAP: f64 = 1e-3;

/// `(Γ̄, τ̄)` with `Γ̄ Δg' = −Δσ_E` and `τ̄ Δg' = −Δσ`.
fn energy_means(model: &Model, a: f64, b: f64, ev: &CellEval, l: usize, r: usize) -> (f64, f64) {
    if a == b {
        return (a, ev.tau[l]);
    }
    let lo = a.min(b);
    if lo > 0.0 && (b - a).abs() <= CLOSE_GAP * lo {
        let rule = gauss8();
        let e = model.energy_tension();
        let den = rule.integrate(|s| e.slope(s) / s, a, b);
        let num_e = rule.integrate(|s| e.slope(s), a, b);
        let num_d = if model.drive_is_energy() {
            num_e
        } else {
            rule.integrate(|s| model.drive().slope(s), a, b)
        };
        if den != 0.0 {
            return (num_e / den, num_d / den);
        }
    } else {
        let dgp = ev.dg[r] - ev.dg[l];
        if dgp != 0.0 && dgp.is_finite() {
            return (-(ev.sig_e[r] - ev.sig_e[l]) / dgp, -(ev.sig_d[r] - ev.sig_d[l]) / dgp);
        }
    }
    let m = 0.5 * (a + b);
    (m.max(0.0), (0.5 * (ev.tau[l] + ev.tau[r])).max(0.0))
}

/// Face quantities of a state.
pub(crate) struct Faces {
    pub fh: Vec<f64>,
    pub fg: Vec<f64>,
    pub d3: Vec<f64>,
}

pub(crate) fn faces(model: &Model, d: f64, transport: GammaTransport, h: &[f64], gamma: &[f64], ev: &CellEval, dx: f64) -> Faces {
    let n = h.len();
    let mut d3 = vec![0.0; n + 1];
    d3_face(h, dx, &mut d3);
    let mut fh = vec![0.0; n + 1];
    let mut fg = vec![0.0; n + 1];
    for j in 1..n {
        let (l, r) = (j - 1, j);
        let m3 = 0.5 * (mobility(3, h[l]) + mobility(3, h[r])) + model.floor();
        let m2 = 0.5 * (mobility(2, h[l]) + mobility(2, h[r]));
        let m1 = 0.5 * (mobility(1, h[l]) + mobility(1, h[r]));
        let ds = (ev.sig_d[r] - ev.sig_d[l]) / dx;
        let (gbar, tbar) = match transport {
            GammaTransport::EnergyMean => energy_means(model, gamma[l], gamma[r], ev, l, r),
            GammaTransport::Upwind => {
                let g = if m1 * ds >= 0.0 { gamma[l] } else { gamma[r] };
                let t = if m2 * d3[j] >= 0.0 { ev.tau[l] } else { ev.tau[r] };
                (g, t)
            }
        };
        fh[j] = m3 * d3[j] + m2 * ds;
        fg[j] = m2 * tbar * d3[j] + m1 * gbar * ds - d * (gamma[r] - gamma[l]) / dx;
    }
    Faces { fh, fg, d3 }
}

/// Film flux on the `n + 1` faces; boundary faces are zero.
pub fn flux_h(state: &GridState, cfg: &SolverConfig, model: &Model) -> Vec<f64> {
    let ev = CellEval::new(model, state.gamma.values());
    faces(model, cfg.d, cfg.gamma_transport, state.h.values(), state.gamma.values(), &ev, state.mesh().dx()).fh
}

/// Surfactant flux on the `n + 1` faces; boundary faces are zero.
pub fn flux_gamma(state: &GridState, cfg: &SolverConfig, model: &Model) -> Vec<f64> {
    let ev = CellEval::new(model, state.gamma.values());
    faces(model, cfg.d, cfg.gamma_transport, state.h.values(), state.gamma.values(), &ev, state.mesh().dx()).fg
}

fn full_residual(
    model: &Model,
    cfg: &SolverConfig,
    mesh: &Mesh,
    old: &GridState,
    t_new: f64,
    dt: f64,
    u: &[f64],
    out: &mut [f64],
) {
    let n = mesh.n();
    let dx = mesh.dx();
    let h: Vec<f64> = (0..n).map(|j| u[2 * j]).collect();
    let g: Vec<f64> = (0..n).map(|j| u[2 * j + 1]).collect();
    let ev = CellEval::new(model, &g);
    let f = faces(model, cfg.d, cfg.gamma_transport, &h, &g, &ev, dx);
    let mut div_h = vec![0.0; n];
    let mut div_g = vec![0.0; n];
    divergence(&f.fh, dx, &mut div_h);
    divergence(&f.fg, dx, &mut div_g);
    let (ho, go) = (old.h.values(), old.gamma.values());
    for j in 0..n {
        let (sh, sg) = match model.source() {
            Some(src) => src(t_new, mesh.center(j)),
            None => (0.0, 0.0),
        };
        out[2 * j] = (h[j] - ho[j]) / dt + div_h[j] - sh;
        out[2 * j + 1] = (g[j] - go[j]) / dt + div_g[j] - sg;
    }
}

/// Backward-Euler residual `[(u − u_old)/dt + div F(u) − S]`, interleaved as
/// `(R_h, R_Γ)` per cell.
pub fn residual(new: &GridState, old: &GridState, dt: f64, cfg: &SolverConfig, model: &Model) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    let mesh = *new.mesh();
    let u = interleave(new.h.values(), new.gamma.values());
    let mut out = vec![0.0; u.len()];
    full_residual(model, cfg, &mesh, old, new.t, dt, &u, &mut out);
    Ok(out)
}

fn interleave(h: &[f64], g: &[f64]) -> Vec<f64> {
    h.iter().zip(g).flat_map(|(&a, &b)| [a, b]).collect()
}

fn rejected(dt: f64, iters: usize, residual: f64, reason: RejectReason) -> StepOutcome {
    StepOutcome {
        accepted: false,
        newton_iters: iters,
        dt_used: dt,
        reject_reason: Some(reason),
        residual,
    }
}

fn finish(old: &GridState, h: Vec<f64>, g: Vec<f64>, dt: f64, iters: usize, residual: f64) -> (GridState, StepOutcome) {
    let min = h.iter().chain(&g).cloned().fold(f64::INFINITY, f64::min);
    let finite = h.iter().chain(&g).all(|v| v.is_finite());
    if !finite {
        return (old.clone(), rejected(dt, iters, residual, RejectReason::NewtonDiverged));
    }
    if min < -NEGATIVITY_TOL {
        return (old.clone(), rejected(dt, iters, residual, RejectReason::NegativityViolated));
    }
    let state = GridState::from_vecs(*old.mesh(), h, g, old.t + dt).expect("finite values on the same mesh");
    (
        state,
        StepOutcome {
            accepted: true,
            newton_iters: iters,
            dt_used: dt,
            reject_reason: None,
            residual,
        },
    )
}

/// One implicit step of size `dt`. Rejected steps return the old state.
pub fn newton_step(old: &GridState, dt: f64, cfg: &SolverConfig, model: &Model) -> Result<(GridState, StepOutcome)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    match cfg.scheme {
        Scheme::FullImplicit => Ok(full_step(old, dt, cfg, model)),
        Scheme::SemiImplicit => Ok(semi_step(old, dt, cfg, model)),
    }
}

fn full_step(old: &GridState, dt: f64, cfg: &SolverConfig, model: &Model) -> (GridState, StepOutcome) {
    let mesh = *old.mesh();
    let n = mesh.n();
    let t_new = old.t + dt;
    let layout = Layout {
        cells: n,
        blocks: 2,
        half_width: 2,
    };
    let mut u = interleave(old.h.values(), old.gamma.values());
    let opts = NewtonOptions {
        tol: cfg.newton_tol,
        max_iter: cfg.newton_max_iter,
        residual_scale: dt,
    };
    let rep = newton::solve(
        &layout,
        &mut u,
        |x: &[f64], r: &mut [f64]| full_residual(model, cfg, &mesh, old, t_new, dt, x, r),
        &opts,
    );
    if let Some(reason) = rep.reason {
        return (old.clone(), rejected(dt, rep.iterations, rep.residual, reason));
    }
    let h = (0..n).map(|j| u[2 * j]).collect();
    let g = (0..n).map(|j| u[2 * j + 1]).collect();
    finish(old, h, g, dt, rep.iterations, rep.residual)
}

/// Advective face velocities `(m2 d3h, m1 dσ)` of a state.
fn advective_velocities(h: &[f64], ev: &CellEval, dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = h.len();
    let mut d3 = vec![0.0; n + 1];
    d3_face(h, dx, &mut d3);
    let mut v1 = vec![0.0; n + 1];
    let mut v2 = vec![0.0; n + 1];
    for j in 1..n {
        let m2 = 0.5 * (mobility(2, h[j - 1]) + mobility(2, h[j]));
        let m1 = 0.5 * (mobility(1, h[j - 1]) + mobility(1, h[j]));
        v1[j] = m2 * d3[j];
        v2[j] = m1 * (ev.sig_d[j] - ev.sig_d[j - 1]) / dx;
    }
    (v1, v2)
}

/// Largest step for the explicit surfactant transport at the configured CFL
/// number: `cfl·dx/max|v|` for the advective velocities and
/// `cfl·dx²/max(m1 Γ |σ'|)` for the Marangoni self-diffusion.
pub fn cfl_limit(state: &GridState, cfg: &SolverConfig, model: &Model) -> f64 {
    let ev = CellEval::new(model, state.gamma.values());
    let dx = state.mesh().dx();
    let h = state.h.values();
    let g = state.gamma.values();
    let (v1, v2) = advective_velocities(h, &ev, dx);
    let vmax = v1.iter().zip(&v2).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    // The Marangoni transport m1 Γ ∂σ(Γ) is a nonlinear diffusion with
    // coefficient m1 Γ |σ'|, which adds a parabolic restriction.
    let mut kmax: f64 = 0.0;
    for j in 1..h.len() {
        let m1 = 0.5 * (mobility(1, h[j - 1]) + mobility(1, h[j]));
        let dg = g[j] - g[j - 1];
        let slope = if dg != 0.0 {
            ((ev.sig_d[j] - ev.sig_d[j - 1]) / dg).abs()
        } else {
            model.drive().slope(g[j]).abs()
        };
        kmax = kmax.max(m1 * g[j - 1].max(g[j]) * slope);
    }
    let mut limit = f64::INFINITY;
    if vmax > 0.0 {
        limit = limit.min(cfg.cfl * dx / vmax);
    }
    if kmax > 0.0 {
        limit = limit.min(cfg.cfl * dx * dx / kmax);
    }
    limit
}

/// Explicit upwind transport of `Γ`, then implicit film and diffusion solves.
fn semi_step(old: &GridState, dt: f64, cfg: &SolverConfig, model: &Model) -> (GridState, StepOutcome) {
    let mesh = *old.mesh();
    let n = mesh.n();
    let dx = mesh.dx();
    let t_new = old.t + dt;
    let (ho, go) = (old.h.values(), old.gamma.values());
    let ev = CellEval::new(model, go);

    // Film height: implicit in h, surfactant frozen.
    let layout = Layout {
        cells: n,
        blocks: 1,
        half_width: 2,
    };
    let mut h = ho.to_vec();
    let opts = NewtonOptions {
        tol: cfg.newton_tol,
        max_iter: cfg.newton_max_iter,
        residual_scale: dt,
    };
    let floor = model.floor();
    let film = |x: &[f64], r: &mut [f64]| {
        let mut d3 = vec![0.0; n + 1];
        d3_face(x, dx, &mut d3);
        let mut fh = vec![0.0; n + 1];
        for j in 1..n {
            let m3 = 0.5 * (mobility(3, x[j - 1]) + mobility(3, x[j])) + floor;
            let m2 = 0.5 * (mobility(2, x[j - 1]) + mobility(2, x[j]));
            fh[j] = m3 * d3[j] + m2 * (ev.sig_d[j] - ev.sig_d[j - 1]) / dx;
        }
        divergence(&fh, dx, r);
        for j in 0..n {
            let sh = model.source().map_or(0.0, |s| s(t_new, mesh.center(j)).0);
            r[j] += (x[j] - ho[j]) / dt - sh;
        }
    };
    let rep = newton::solve(&layout, &mut h, film, &opts);
    if let Some(reason) = rep.reason {
        return (old.clone(), rejected(dt, rep.iterations, rep.residual, reason));
    }

    // Surfactant: upwind advection of the old Γ by the velocities of the new
    // film. Using the old film here makes the fourth-order coupling explicit.
    let (v1, v2) = advective_velocities(&h, &ev, dx);
    let vmax = v1.iter().zip(&v2).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    if dt * vmax > dx {
        return (old.clone(), rejected(dt, rep.iterations, rep.residual, RejectReason::NegativityViolated));
    }
    let mut fadv = vec![0.0; n + 1];
    for j in 1..n {
        let t_up = if v1[j] >= 0.0 { ev.tau[j - 1] } else { ev.tau[j] };
        let g_up = if v2[j] >= 0.0 { go[j - 1] } else { go[j] };
        fadv[j] = v1[j] * t_up + v2[j] * g_up;
    }
    let mut div = vec![0.0; n];
    divergence(&fadv, dx, &mut div);
    let mut rhs: Vec<f64> = (0..n)
        .map(|j| {
            let sg = model.source().map_or(0.0, |s| s(t_new, mesh.center(j)).1);
            go[j] - dt * div[j] + dt * sg
        })
        .collect();

    // Implicit diffusion: (I − dt D Δ) Γ = rhs with reflected ends.
    let c = dt * cfg.d / (dx * dx);
    let mut a = Banded::zeros(n, 1, 1);
    for j in 0..n {
        let mut diag = 1.0;
        if j > 0 {
            a.set(j, j - 1, -c);
            diag += c;
        }
        if j + 1 < n {
            a.set(j, j + 1, -c);
            diag += c;
        }
        a.set(j, j, diag);
    }
    match a.factor() {
        Ok(lu) => lu.solve(&mut rhs),
        Err(_) => return (old.clone(), rejected(dt, rep.iterations, rep.residual, RejectReason::NewtonDiverged)),
    }
    finish(old, h, rhs, dt, rep.iterations, rep.residual)
}

#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub state: GridState,
    pub record: DiagnosticsRecord,
    pub outcome: StepOutcome,
}

/// Accepted steps of a run; the initial state is kept separately.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: GridState,
    pub initial_record: DiagnosticsRecord,
    pub steps: Vec<TrajectoryStep>,
    pub rejected: usize,
}

impl Trajectory {
    /// All states in time order, the initial one first.
    pub fn states(&self) -> impl Iterator<Item = &GridState> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.state))
    }

    pub fn records(&self) -> impl Iterator<Item = &DiagnosticsRecord> {
        std::iter::once(&self.initial_record).chain(self.steps.iter().map(|s| &s.record))
    }

    pub fn last(&self) -> &GridState {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }
}

/// Adaptive time loop from `state.t` to exactly `t_target`.
///
/// Rejected steps halve `dt`; accepted steps grow it by `cfg.growth` up to
/// `cfg.dt_max`. Falling below `cfg.dt_min` is a hard error carrying the
/// last accepted state.
pub fn advance(
    state: &GridState,
    cfg: &SolverConfig,
    model: &Model,
    t_target: f64,
    recorder: &mut Recorder,
) -> Result<Trajectory> {
    cfg.validate()?;
    if t_target < state.t {
        return Err(Error::Argument(format!(
            "target time {t_target} precedes the state time {}",
            state.t
        )));
    }
    let initial_record = recorder.record(state, cfg, model, 0.0, 0)?;
    let mut traj = Trajectory {
        initial: state.clone(),
        initial_record,
        steps: Vec::new(),
        rejected: 0,
    };
    let mut current = state.clone();
    let mut dt = cfg.dt_init;
    while current.t < t_target {
        let remaining = t_target - current.t;
        let mut step = dt.min(remaining);
        if cfg.scheme == Scheme::SemiImplicit {
            step = step.min(cfl_limit(&current, cfg, model));
        }
        let last = step >= remaining * (1.0 - 1e-12);
        if last {
            step = remaining;
        }
        let (mut next, outcome) = newton_step(&current, step, cfg, model)?;
        if outcome.accepted {
            if last {
                next.t = t_target;
            }
            let record = recorder.record(&next, cfg, model, step, outcome.newton_iters)?;
            current = next.clone();
            traj.steps.push(TrajectoryStep {
                state: next,
                record,
                outcome,
            });
            dt = (dt * cfg.growth).min(cfg.dt_max);
        } else {
            traj.rejected += 1;
            dt = 0.5 * step;
            if dt < cfg.dt_min {
                return Err(Error::TimeStepUnderflow {
                    t: current.t,
                    dt_min: cfg.dt_min,
                    dump: Box::new((current.h.values().to_vec(), current.gamma.values().to_vec())),
                });
            }
        }
    }
    Ok(traj)
}
