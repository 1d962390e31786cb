use std::f64::consts::PI;

use surflow::diagnostics::Recorder;
use surflow::grid::{Field, Mesh};
use surflow::harness::scenario::{mms_exact, mms_source, s1_drop};
use surflow::solver::*;
use surflow::tension::SurfaceTension;

fn physical() -> Model {
    Model::physical(SurfaceTension::sigma_infty()).unwrap()
}

fn flat(n: usize, h: f64, g: f64) -> GridState {
    let m = Mesh::new(n).unwrap();
    GridState::new(Field::constant(m, h), Field::constant(m, g), 0.0).unwrap()
}

fn max_diff(a: &GridState, b: &GridState) -> f64 {
    let d = |x: &Field, y: &Field| x.values().iter().zip(y.values()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    d(&a.h, &b.h).max(d(&a.gamma, &b.gamma))
}

#[test]
fn flat_states_are_fixed_points() {
    let model = physical();
    for scheme in [Scheme::FullImplicit, Scheme::SemiImplicit] {
        let cfg = SolverConfig { scheme, ..Default::default() };
        for dt in [1e-6, 1e-3, 1.0] {
            let st = flat(32, 0.5, 1.0);
            let (next, out) = newton_step(&st, dt, &cfg, &model).unwrap();
            assert!(out.accepted);
            assert!(out.newton_iters <= 1);
            assert!(max_diff(&st, &next) <= 1e-13);
        }
    }
}

#[test]
fn trivial_fluxes() {
    let model = physical();
    let cfg = SolverConfig::default();
    let st = flat(16, 0.7, 1.0);
    assert!(flux_h(&st, &cfg, &model).iter().all(|&f| f == 0.0));
    assert!(flux_gamma(&st, &cfg, &model).iter().all(|&f| f == 0.0));

    // No film: only diffusion moves surfactant.
    let m = Mesh::new(16).unwrap();
    let g = m.sample(|x| 1.0 + x * x);
    let st = GridState::new(Field::constant(m, 0.0), g.clone(), 0.0).unwrap();
    assert!(flux_h(&st, &cfg, &model).iter().all(|&f| f == 0.0));
    let fg = flux_gamma(&st, &cfg, &model);
    let d1 = g.d1_face();
    for j in 0..=16 {
        assert!((fg[j] + cfg.d * d1[j]).abs() < 1e-14);
    }
}

#[test]
fn film_flux_matches_analytic_flux() {
    // h = 2 + cos πx, Γ ≡ 1: F_h = h³/3 · π³ sin πx.
    let model = physical();
    let cfg = SolverConfig::default();
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let m = Mesh::new(n).unwrap();
        let st = GridState::new(m.sample(|x| 2.0 + (PI * x).cos()), Field::constant(m, 1.0), 0.0).unwrap();
        let f = flux_h(&st, &cfg, &model);
        let mut e: f64 = 0.0;
        for j in 1..n {
            let x = m.face(j);
            let exact = (2.0 + (PI * x).cos()).powi(3) / 3.0 * PI.powi(3) * (PI * x).sin();
            e = e.max((f[j] - exact).abs());
        }
        errs.push(e);
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.0).contains(&ratio), "refinement ratio {ratio}");
    }
}

#[test]
fn residual_rejects_nonpositive_dt() {
    let st = flat(16, 0.5, 1.0);
    assert!(residual(&st, &st, 0.0, &SolverConfig::default(), &physical()).is_err());
    assert!(newton_step(&st, 0.0, &SolverConfig::default(), &physical()).is_err());
}

#[test]
fn residual_of_manufactured_solution_is_consistent() {
    // The backward-Euler residual of the exact profiles with sources is
    // O(dt + dx²); with dt ∝ dx² it falls by ~4 per refinement.
    let d = 0.1;
    let model = physical().with_source(mms_source(d));
    let cfg = SolverConfig { d, ..Default::default() };
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let m = Mesh::new(n).unwrap();
        let dt = 0.5 * m.dx() * m.dx();
        let at = |t: f64| {
            GridState::new(m.sample(|x| mms_exact(t, x).0), m.sample(|x| mms_exact(t, x).1), t).unwrap()
        };
        let r = residual(&at(0.1 + dt), &at(0.1), dt, &cfg, &model).unwrap();
        errs.push(r.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.0).contains(&ratio), "refinement ratio {ratio} from {errs:?}");
    }
}

#[test]
fn s1_first_step_converges_quickly() {
    let st = s1_drop(Mesh::new(128).unwrap());
    let (_, out) = newton_step(&st, 1e-6, &SolverConfig::default(), &physical()).unwrap();
    assert!(out.accepted);
    // Baseline: one Newton iteration plus the polish correction.
    assert!(out.newton_iters <= 8, "{} iterations", out.newton_iters);
}

#[test]
fn huge_step_is_never_silently_accepted() {
    let cfg = SolverConfig::default();
    let st = s1_drop(Mesh::new(64).unwrap());
    let (next, out) = newton_step(&st, 1e3, &cfg, &physical()).unwrap();
    if out.accepted {
        assert!(out.residual <= cfg.newton_tol);
        let r = residual(&next, &st, 1e3, &cfg, &physical()).unwrap();
        let scale = next.h.max().max(next.gamma.max()).max(1.0);
        assert!(1e3 * r.iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale <= cfg.newton_tol);
    } else {
        assert!(out.reject_reason.is_some());
        assert_eq!(max_diff(&st, &next), 0.0);
    }
}

#[test]
fn upwind_spike_stays_nonnegative() {
    let m = Mesh::new(32).unwrap();
    let mut g = vec![0.0; 32];
    g[16] = 1.0;
    let st = GridState::new(Field::constant(m, 1.0), Field::new(m, g).unwrap(), 0.0).unwrap();
    let model = physical();
    let cfg = SolverConfig {
        scheme: Scheme::SemiImplicit,
        gamma_transport: GammaTransport::Upwind,
        ..Default::default()
    };
    let dt = cfl_limit(&st, &cfg, &model);
    assert!(dt.is_finite() && dt > 0.0);
    let (next, out) = newton_step(&st, dt, &cfg, &model).unwrap();
    assert!(out.accepted);
    assert!(next.gamma.min() >= -1e-12);
    assert!((next.gamma.integral() - st.gamma.integral()).abs() < 1e-15);
}

#[test]
fn advance_to_current_time_is_empty() {
    let st = s1_drop(Mesh::new(16).unwrap());
    let traj = advance(&st, &SolverConfig::default(), &physical(), 0.0, &mut Recorder::new(0)).unwrap();
    assert!(traj.steps.is_empty());
    assert_eq!(traj.last(), &st);
    assert!(advance(&st, &SolverConfig::default(), &physical(), -1.0, &mut Recorder::new(0)).is_err());
}

#[test]
fn advance_conserves_mass_and_dissipates_energy() {
    let st = s1_drop(Mesh::new(64).unwrap());
    let cfg = SolverConfig::default();
    let traj = advance(&st, &cfg, &physical(), 0.01, &mut Recorder::new(0)).unwrap();
    assert_eq!(traj.last().t, 0.01);
    let recs: Vec<_> = traj.records().collect();
    let (m0, g0, e0) = (recs[0].mass_h, recs[0].mass_gamma, recs[0].energy);
    for w in recs.windows(2) {
        assert!(((w[1].mass_h - m0) / m0).abs() <= 1e-12);
        assert!(((w[1].mass_gamma - g0) / g0).abs() <= 1e-12);
        assert!(w[1].energy <= w[0].energy + 1e-10 * e0.max(1.0));
    }
    for s in &traj.steps {
        assert!(s.outcome.accepted && s.outcome.reject_reason.is_none());
    }
}

#[test]
fn dt_growth_and_ceiling() {
    let st = s1_drop(Mesh::new(32).unwrap());
    let cfg = SolverConfig::default();
    let traj = advance(&st, &cfg, &physical(), 0.002, &mut Recorder::new(0)).unwrap();
    let dts: Vec<f64> = traj.steps.iter().map(|s| s.outcome.dt_used).collect();
    assert_eq!(dts[0], cfg.dt_init);
    assert!((dts[1] / dts[0] - 1.2).abs() < 1e-12);
    assert!(dts.iter().all(|&d| d <= cfg.dt_max));
}

#[test]
fn underflow_is_a_hard_error_with_dump() {
    // A newton budget of one iteration with an unreachable tolerance forces
    // every step to be rejected.
    let st = s1_drop(Mesh::new(16).unwrap());
    let cfg = SolverConfig {
        newton_tol: 1e-300,
        newton_max_iter: 1,
        dt_min: 1e-7,
        dt_init: 1e-6,
        ..Default::default()
    };
    match advance(&st, &cfg, &physical(), 1e-3, &mut Recorder::new(0)) {
        Err(surflow::Error::TimeStepUnderflow { dump, .. }) => assert_eq!(dump.0.len(), 16),
        other => panic!("expected underflow, got {other:?}"),
    }
}

#[test]
fn semi_implicit_keeps_gamma_nonnegative() {
    let st = s1_drop(Mesh::new(64).unwrap());
    let cfg = SolverConfig {
        scheme: Scheme::SemiImplicit,
        gamma_transport: GammaTransport::Upwind,
        ..Default::default()
    };
    let traj = advance(&st, &cfg, &physical(), 0.005, &mut Recorder::new(0)).unwrap();
    assert!(traj.records().all(|r| r.min_gamma >= -1e-12));
}

#[test]
fn regularized_runs_approach_physical() {
    let st = s1_drop(Mesh::new(64).unwrap());
    let base = SurfaceTension::sigma_infty();
    let run = |mode: ModelMode, k: u32| {
        let model = Model::new(base.clone(), mode, k, DEFAULT_ENERGY_RANGE).unwrap();
        let cfg = SolverConfig { k, ..Default::default() };
        advance(&st, &cfg, &model, 0.005, &mut Recorder::new(0)).unwrap().last().clone()
    };
    let phys = run(ModelMode::Physical, 0);
    let l2 = |a: &GridState| {
        let d: f64 = a.h.values().iter().zip(phys.h.values()).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
            + a.gamma.values().iter().zip(phys.gamma.values()).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
        (d * a.mesh().dx()).sqrt()
    };
    for mode in [ModelMode::Truncated, ModelMode::Mollified] {
        let d: Vec<f64> = [16, 32, 64].iter().map(|&k| l2(&run(mode, k))).collect();
        assert!(d[1] <= d[0] && d[2] <= d[1], "{mode:?}: {d:?}");
    }
}

#[test]
fn config_validation() {
    assert!(SolverConfig::default().validate().is_ok());
    let bad = SolverConfig { d: 0.0, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = SolverConfig { dt_init: 1.0, ..Default::default() };
    assert!(bad.validate().is_err());
}
