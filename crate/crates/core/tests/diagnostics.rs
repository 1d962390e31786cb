use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surflow::diagnostics::*;
use surflow::grid::{Field, Mesh};
use surflow::solver::{advance, GridState, Model, SolverConfig};
use surflow::tension::{SurfaceTension, Tension};

fn state(m: Mesh, h: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> GridState {
    GridState::new(m.sample(h), m.sample(g), 0.0).unwrap()
}

fn model() -> Model {
    Model::physical(SurfaceTension::sigma_infty()).unwrap()
}

#[test]
fn energy_examples() {
    let m = model();
    let flat = state(Mesh::new(32).unwrap(), |_| 0.4, |_| 1.0);
    assert_eq!(energy(&flat, m.energy()), 0.0);

    let two = state(Mesh::new(32).unwrap(), |_| 0.4, |_| 2.0);
    assert!((energy(&two, m.energy()) - (2.0 * LN_2 - 1.0)).abs() < 1e-12);

    // ∫ |∂x cos πx|²/2 = π²/4.
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let st = state(Mesh::new(n).unwrap(), |x| (PI * x).cos(), |_| 1.0);
        errs.push((energy(&st, m.energy()) - PI * PI / 4.0).abs());
    }
    assert!(errs[2] < 1e-3);
    assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
}

#[test]
fn dissipation_examples() {
    let sigma = SurfaceTension::sigma_infty();
    let cfg = SolverConfig::default();
    let flat = state(Mesh::new(32).unwrap(), |_| 0.4, |_| 1.0);
    let d = dissipation(&flat, &cfg, &sigma, 0.0);
    assert_eq!((d.cap, d.mar, d.dif, d.diss_theta), (0.0, 0.0, 0.0, 0.0));

    // Γ = 1 + x, h ≡ 1: dif = D ∫ dx/Γ and diss_theta = ∫ dx/Γ at θ = 0.
    // Faces cover [dx/2, 1 − dx/2]; the end half cells carry no gradient
    // under the reflection.
    let mut errs = Vec::new();
    for n in [64, 128, 256] {
        let st = state(Mesh::new(n).unwrap(), |_| 1.0, |x| 1.0 + x);
        let dx = 1.0 / n as f64;
        let exact = ((2.0 - 0.5 * dx) / (1.0 + 0.5 * dx)).ln();
        let d = dissipation(&st, &cfg, &sigma, 0.0);
        errs.push((d.dif - cfg.d * exact).abs().max((d.diss_theta - exact).abs()));
        assert_eq!(d.flagged, 0);
    }
    assert!(errs[0] < 1e-4, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");

    // Vanishing Γ is flagged rather than divided by.
    let st = state(Mesh::new(16).unwrap(), |_| 1.0, |x| if x < 0.5 { 0.0 } else { x });
    assert!(dissipation(&st, &cfg, &sigma, 0.0).flagged > 0);
}

#[test]
fn fluxes_vanish_on_trivial_states() {
    let sigma = SurfaceTension::sigma_infty();
    let flat = state(Mesh::new(16).unwrap(), |_| 0.4, |_| 1.0);
    let (jf, js) = fluxes_jf_js(&flat, &sigma);
    assert!(jf.iter().chain(&js).all(|&v| v == 0.0));
    let dry = state(Mesh::new(16).unwrap(), |_| 0.0, |x| 1.0 + x);
    let (jf, js) = fluxes_jf_js(&dry, &sigma);
    assert!(jf.iter().chain(&js).all(|&v| v == 0.0));
}

#[test]
fn flux_identity_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let h: f64 = rng.random::<f64>() * 3.0;
        let d3: f64 = rng.random::<f64>() * 200.0 - 100.0;
        let ds: f64 = rng.random::<f64>() * 20.0 - 10.0;
        let (l, r) = flux_identity(h, d3, ds);
        assert!((l - r).abs() <= 1e-10 * r.abs().max(1.0), "{l} vs {r}");
    }
}

#[test]
fn embedding_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let m = Mesh::new(64).unwrap();
    let c = Field::constant(m, 3.0);
    let a = embedding_audit(&c, 0.0, 500, &mut rng).unwrap();
    assert_eq!(a.worst_pair_ratio, 0.0);
    assert!(a.sup_ratio <= 1.0);

    let lin = m.sample(|x| x);
    let a = embedding_audit(&lin, 0.0, 500, &mut rng).unwrap();
    // G of the reconstruction: ln 2 less the two flat half cells.
    let dx = m.dx();
    let exact = ((1.0 + 1.0 - 0.5 * dx) / (1.0 + 0.5 * dx)).ln();
    assert!((a.g - exact).abs() < 1e-13);
    assert!(a.holds());

    assert!(embedding_audit(&lin, 1.0, 10, &mut rng).is_err());
    let neg = Field::new(m, vec![-1e-6; 64]).unwrap();
    assert!(embedding_audit(&neg, 0.0, 10, &mut rng).is_err());
}

#[test]
fn embedding_random_piecewise_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for theta in [0.0, 0.5, 0.9] {
        for _ in 0..100 {
            let n = rng.random_range(8..200);
            let m = Mesh::new(n).unwrap();
            let scale = 10f64.powf(rng.random_range(-2.0..3.0));
            let v: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.2) { 0.0 } else { scale * rng.random::<f64>() })
                .collect();
            let a = embedding_audit(&Field::new(m, v).unwrap(), theta, 10 * n, &mut rng).unwrap();
            assert!(a.holds(), "θ={theta}: {a:?}");
        }
    }
}

#[test]
fn weak_residual_flat_and_mass_mode() {
    let m = model();
    let cfg = SolverConfig::default();
    let flat = state(Mesh::new(32).unwrap(), |_| 0.4, |_| 1.0);
    let traj = advance(&flat, &cfg, &m, 1e-3, &mut Recorder::new(0)).unwrap();
    for r in weak_residual(&traj, &cfg, &m, 5).unwrap() {
        assert!(r.film < 1e-12 && r.surfactant < 1e-12, "{r:?}");
    }

    let st = surflow::harness::scenario::s1_drop(Mesh::new(64).unwrap());
    let traj = advance(&st, &cfg, &m, 2e-3, &mut Recorder::new(0)).unwrap();
    let r = weak_residual(&traj, &cfg, &m, 3).unwrap();
    assert!(r[0].film <= 1e-10 && r[0].surfactant <= 1e-10);

    let empty = advance(&st, &cfg, &m, 0.0, &mut Recorder::new(0)).unwrap();
    assert!(weak_residual(&empty, &cfg, &m, 3).is_err());
}

#[test]
fn record_of_s1_is_consistent() {
    let m = model();
    let cfg = SolverConfig::default();
    let st = surflow::harness::scenario::s1_drop(Mesh::new(128).unwrap());
    let r = Recorder::new(5).record(&st, &cfg, &m, 0.0, 0).unwrap();
    // The identity weighting equals h³/3|∂³h|² + h²∂σ∂³h + h|∂σ|², which is
    // at least the physical weighting (1/21, 1/8).
    assert!(r.identity_dissipation >= r.dissipation.cap + r.dissipation.mar + r.dissipation.dif);
    assert!(r.scheme_dissipation >= 0.0);
    assert!(r.regularized.total() >= 0.0);
    assert_eq!(r.holder.pairs, 127 + 1280);
    // Same seed, same audit.
    let again = Recorder::new(5).record(&st, &cfg, &m, 0.0, 0).unwrap();
    assert_eq!(r, again);
    assert!(SurfaceTension::sigma_infty().slope(0.3) < 0.0);
}
