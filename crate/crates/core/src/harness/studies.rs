//! Multi-run experiments: k-sweep, joint refinement and the manufactured
//! order study.

use serde::Serialize;

use crate::diagnostics::{weak_residual, Recorder, WeakResidual};
use crate::error::{Error, Result};
use crate::grid::Mesh;
use crate::regularize::RegularizedTension;
use crate::solver::{advance, Model, ModelMode, SolverConfig, Trajectory};

use super::config::{ExperimentConfig, RegMode};
use super::ledger::{AuditEntry, Ledger};
use super::run::{build_model, initial_state};
use super::scenario::mms_exact;

/// Output times shared by the members of a sweep.
pub const SWEEP_SAMPLES: usize = 20;

/// Linear-in-time interpolation of cell values at `t`.
fn values_at(traj: &Trajectory, t: f64) -> (Vec<f64>, Vec<f64>) {
    let states: Vec<_> = traj.states().collect();
    let i = states.partition_point(|s| s.t < t).min(states.len() - 1);
    if i == 0 || states[i].t == t {
        return (states[i].h.values().to_vec(), states[i].gamma.values().to_vec());
    }
    let (a, b) = (states[i - 1], states[i]);
    let w = (t - a.t) / (b.t - a.t);
    let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (1.0 - w) * p + w * q).collect();
    (mix(a.h.values(), b.h.values()), mix(a.gamma.values(), b.gamma.values()))
}

/// `L²((0,T)×(0,1))` distances of `h` and `Γ` between two runs on the same
/// mesh, by trapezoid rules on `SWEEP_SAMPLES + 1` common times.
pub fn spacetime_l2(a: &Trajectory, b: &Trajectory) -> (f64, f64) {
    let t0 = a.initial.t;
    let t1 = a.last().t.min(b.last().t);
    let dx = a.initial.mesh().dx();
    let ht = (t1 - t0) / SWEEP_SAMPLES as f64;
    let (mut sh, mut sg) = (0.0, 0.0);
    for i in 0..=SWEEP_SAMPLES {
        let t = t0 + i as f64 * ht;
        let (ha, ga) = values_at(a, t);
        let (hb, gb) = values_at(b, t);
        let dh: f64 = ha.iter().zip(&hb).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() * dx;
        let dg: f64 = ga.iter().zip(&gb).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() * dx;
        let w = if i == 0 || i == SWEEP_SAMPLES { 0.5 } else { 1.0 };
        sh += w * ht * dh;
        sg += w * ht * dg;
    }
    (sh.sqrt(), sg.sqrt())
}

/// `sup_{[0, r]} |σ_k − σ|` on a uniform grid refined by the kinks of the ladder.
pub fn sup_sigma_error(reg: &RegularizedTension, r: f64) -> Result<f64> {
    let k = reg.k() as f64;
    let eps = reg.epsilon();
    let mut pts: Vec<f64> = (0..=10_000).map(|i| r * i as f64 / 10_000.0).collect();
    for b in [1.0 / k, k] {
        for d in [-eps, 0.0, eps] {
            if (0.0..=r).contains(&(b + d)) {
                pts.push(b + d);
            }
        }
    }
    let mut sup: f64 = 0.0;
    for s in pts {
        sup = sup.max((reg.sigma_k(s)? - reg.base().sigma_eval(s)?).abs());
    }
    Ok(sup)
}

#[derive(Debug, Clone, Serialize)]
pub struct KMember {
    pub k: u32,
    /// Distances to the physical run; absent if the member failed.
    pub diff_h: Option<f64>,
    pub diff_gamma: Option<f64>,
    pub sup_sigma_error: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KSweepReport {
    pub reg_mode: RegMode,
    pub members: Vec<KMember>,
    /// Distances between consecutive members.
    pub consecutive_h: Vec<Option<f64>>,
    pub consecutive_gamma: Vec<Option<f64>>,
    pub physical_failure: Option<String>,
    pub ledger: Ledger,
}

fn non_increasing(v: &[Option<f64>]) -> Option<bool> {
    let vals: Option<Vec<f64>> = v.iter().copied().collect();
    vals.map(|v| v.windows(2).all(|w| w[1] <= w[0]))
}

/// Runs the scenario in physical mode and for every `k`, then compares.
pub fn run_ksweep(cfg: &ExperimentConfig, ks: &[u32]) -> Result<KSweepReport> {
    let base = cfg.tension()?;
    let mode = match cfg.reg_mode {
        RegMode::Truncated => ModelMode::Truncated,
        RegMode::Mollified => ModelMode::Mollified,
    };
    let state = initial_state(cfg, cfg.n)?;
    let t_end = state.t + cfg.solver.t_end;
    let run = |model: &Model, k: u32| -> Result<Trajectory> {
        let solver = SolverConfig { k, ..cfg.solver.clone() };
        advance(&state, &solver, model, t_end, &mut Recorder::new(cfg.seed))
    };

    let physical = Model::new(base.clone(), ModelMode::Physical, 0, cfg.energy_range).and_then(|m| run(&m, 0));
    let mut trajs = Vec::new();
    let mut members = Vec::new();
    for &k in ks {
        let reg = RegularizedTension::new(base.clone(), k, crate::regularize::Mode::Mollified)?;
        let sup = sup_sigma_error(&reg, 10.0)?;
        let traj = Model::new(base.clone(), mode, k, cfg.energy_range).and_then(|m| run(&m, k));
        let (diff, failure) = match (&traj, &physical) {
            (Ok(t), Ok(p)) => (Some(spacetime_l2(t, p)), None),
            (Err(e), _) => (None, Some(e.to_string())),
            (Ok(_), Err(_)) => (None, None),
        };
        members.push(KMember {
            k,
            diff_h: diff.map(|d| d.0),
            diff_gamma: diff.map(|d| d.1),
            sup_sigma_error: sup,
            failure,
        });
        trajs.push(traj.ok());
    }
    let mut consecutive_h = Vec::new();
    let mut consecutive_gamma = Vec::new();
    for w in trajs.windows(2) {
        let d = match (&w[0], &w[1]) {
            (Some(a), Some(b)) => Some(spacetime_l2(a, b)),
            _ => None,
        };
        consecutive_h.push(d.map(|d| d.0));
        consecutive_gamma.push(d.map(|d| d.1));
    }

    let mut ledger = Ledger::default();
    let sups: Vec<f64> = members.iter().map(|m| m.sup_sigma_error).collect();
    ledger.push(AuditEntry::check(
        "ksweep_uniform_convergence",
        sups.windows(2).all(|w| w[1] < w[0]),
        format!("sup over [0,10] of |σ_k − σ|: {sups:?}"),
    ));
    let dh: Vec<Option<f64>> = members.iter().map(|m| m.diff_h).collect();
    let dg: Vec<Option<f64>> = members.iter().map(|m| m.diff_gamma).collect();
    match (non_increasing(&dh), non_increasing(&dg)) {
        (Some(a), Some(b)) => ledger.push(AuditEntry::check(
            "ksweep_solution_stability",
            a && b,
            format!("‖h_k − h‖ {dh:?}, ‖Γ_k − Γ‖ {dg:?}"),
        )),
        _ => ledger.push(AuditEntry::check(
            "ksweep_solution_stability",
            false,
            "a member run failed; see the report".into(),
        )),
    }
    Ok(KSweepReport {
        reg_mode: cfg.reg_mode,
        members,
        consecutive_h,
        consecutive_gamma,
        physical_failure: physical.err().map(|e| e.to_string()),
        ledger,
    })
}

/// Residuals at or below this are treated as converged roundoff.
pub const WEAK_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct RefineLevel {
    pub n: usize,
    pub dt: f64,
    pub residuals: Vec<WeakResidual>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefineReport {
    pub levels: Vec<RefineLevel>,
    pub ledger: Ledger,
}

/// Weak-form residuals of fixed-step runs under joint `(n, dt)` refinement.
pub fn run_refine(cfg: &ExperimentConfig, ns: &[usize], dts: &[f64], basis_size: usize) -> Result<RefineReport> {
    if ns.len() != dts.len() || ns.is_empty() {
        return Err(Error::Argument("refinement needs one dt per mesh".into()));
    }
    let model = build_model(cfg)?;
    let mut levels = Vec::new();
    for (&n, &dt) in ns.iter().zip(dts) {
        let solver = SolverConfig {
            dt_init: dt,
            dt_max: dt,
            dt_min: cfg.solver.dt_min.min(dt),
            ..cfg.solver.clone()
        };
        let state = initial_state(cfg, n)?;
        let traj = advance(&state, &solver, &model, state.t + solver.t_end, &mut Recorder::new(cfg.seed))?;
        levels.push(RefineLevel {
            n,
            dt,
            residuals: weak_residual(&traj, &solver, &model, basis_size)?,
        });
    }
    let mut ledger = Ledger::default();
    let decreasing = |f: &dyn Fn(&WeakResidual) -> f64| {
        (0..basis_size).all(|m| {
            levels
                .windows(2)
                .all(|w| f(&w[1].residuals[m]) < f(&w[0].residuals[m]) || f(&w[1].residuals[m]) <= WEAK_FLOOR)
        })
    };
    let table: Vec<Vec<(f64, f64)>> = levels
        .iter()
        .map(|l| l.residuals.iter().map(|r| (r.film, r.surfactant)).collect())
        .collect();
    ledger.push(AuditEntry::check(
        "weak_residual_refinement",
        decreasing(&|r| r.film) && decreasing(&|r| r.surfactant),
        format!("(film, surfactant) residual per level and m: {table:?}"),
    ));
    Ok(RefineReport { levels, ledger })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderLevel {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub error_h: f64,
    pub error_gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub levels: Vec<OrderLevel>,
    /// Observed orders between consecutive meshes, from the larger of the
    /// two field errors.
    pub orders: Vec<f64>,
    pub ledger: Ledger,
}

/// Target window for the observed order between 64 and 128 cells.
pub const ORDER_WINDOW: (f64, f64) = (1.7, 2.3);

/// Fixed steps `dt = dt_factor·dx²` on each mesh; errors are max norms at
/// the final time against the manufactured profiles.
pub fn run_mms_order_study(cfg: &ExperimentConfig, ns: &[usize], dt_factor: f64) -> Result<OrderReport> {
    let model = build_model(cfg)?;
    if model.source().is_none() {
        return Err(Error::config("scenario", "the order study needs the MMS scenario"));
    }
    let mut levels = Vec::new();
    for &n in ns {
        let mesh = Mesh::new(n)?;
        let dt = dt_factor * mesh.dx() * mesh.dx();
        let solver = SolverConfig {
            dt_init: dt,
            dt_max: dt,
            dt_min: cfg.solver.dt_min.min(dt),
            ..cfg.solver.clone()
        };
        let state = initial_state(cfg, n)?;
        let t_end = state.t + solver.t_end;
        let traj = advance(&state, &solver, &model, t_end, &mut Recorder::new(cfg.seed).with_pair_factor(0))?;
        let last = traj.last();
        let (mut eh, mut eg): (f64, f64) = (0.0, 0.0);
        for j in 0..n {
            let (h, g) = mms_exact(last.t, mesh.center(j));
            eh = eh.max((last.h.values()[j] - h).abs());
            eg = eg.max((last.gamma.values()[j] - g).abs());
        }
        levels.push(OrderLevel {
            n,
            dt,
            steps: traj.steps.len(),
            error_h: eh,
            error_gamma: eg,
        });
    }
    let orders: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let e0 = w[0].error_h.max(w[0].error_gamma);
            let e1 = w[1].error_h.max(w[1].error_gamma);
            (e0 / e1).ln() / (w[1].n as f64 / w[0].n as f64).ln()
        })
        .collect();
    let mut ledger = Ledger::default();
    let pair = levels.windows(2).position(|w| w[0].n == 64 && w[1].n == 128);
    match pair {
        Some(i) => ledger.push(AuditEntry::check(
            "mms_order",
            (ORDER_WINDOW.0..=ORDER_WINDOW.1).contains(&orders[i]),
            format!("order between 64 and 128 cells {:.4}; all orders {orders:?}", orders[i]),
        )),
        None => {
            let worst = orders.iter().cloned().fold(f64::INFINITY, f64::min);
            ledger.push(AuditEntry::check(
                "mms_order",
                worst >= 1.5,
                format!("meshes 64 and 128 not both present; smallest order {worst:.4}"),
            ))
        }
    }
    Ok(OrderReport { levels, orders, ledger })
}
