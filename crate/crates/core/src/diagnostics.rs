//! Measured quantities along a trajectory: masses, energy, dissipation in
//! three weightings, the fluxes `J_f`, `J_s`, the Hölder embedding audit and
//! weak-form residuals.
//!
//! Face quantities use the arithmetic mean of the neighbouring cells and live
//! on the `n − 1` interior faces, each with weight `dx`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{d1_face, d3_face, Field};
use crate::regularize::mobility;
use crate::solver::{faces, CellEval, GridState, Model, SolverConfig, Trajectory};
use crate::tension::{FreeEnergy, Tension};

/// Faces next to a cell with `Γ` below this are excluded from the diffusion
/// terms and flagged.
pub const GAMMA_FLOOR: f64 = 1e-12;

/// Random pairs per cell sampled by the embedding audit.
pub const PAIR_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationTerms {
    /// `∫ h³/21 |∂³h|²`.
    pub cap: f64,
    /// `∫ h/8 |∂σ(Γ)|²`.
    pub mar: f64,
    /// `−D ∫ σ'(Γ)/Γ |∂Γ|²`.
    pub dif: f64,
    /// `∫ |∂Γ|² / (Γ (1+Γ)^θ)`.
    pub diss_theta: f64,
    /// Faces skipped in `dif` and `diss_theta` because `Γ` vanished there.
    pub flagged: usize,
}

/// The floor-weighted dissipation `(1/k + a3/7)|∂³h|² + a1/8 |∂σ_k|² − D σ'/Γ |∂Γ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularizedDissipation {
    pub cap: f64,
    pub mar: f64,
    pub dif: f64,
}

impl RegularizedDissipation {
    pub fn total(&self) -> f64 {
        self.cap + self.mar + self.dif
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingAudit {
    /// `∫ |∂Γ|² / (1+Γ)^{1+θ}`.
    #[serde(rename = "G")]
    pub g: f64,
    pub l1: f64,
    pub worst_pair_ratio: f64,
    pub sup_ratio: f64,
    pub pairs: usize,
}

impl EmbeddingAudit {
    pub fn holds(&self) -> bool {
        self.worst_pair_ratio <= 1.0 + 1e-8 && self.sup_ratio <= 1.0 + 1e-8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub mass_h: f64,
    pub mass_gamma: f64,
    pub energy: f64,
    pub dissipation: DissipationTerms,
    pub regularized: RegularizedDissipation,
    /// `∫ (3/2)J_f² + ½J_s² + h³/24 |∂³h|² + h/8 |∂σ|²` plus the diffusion term.
    pub identity_dissipation: f64,
    /// `Σ dx (F_h ∂³h − F_Γ ∂g'(Γ))`, the exact decay rate of the discrete energy.
    pub scheme_dissipation: f64,
    pub jf_norm: f64,
    pub js_norm: f64,
    pub min_h: f64,
    pub min_gamma: f64,
    pub holder: EmbeddingAudit,
    pub newton_iters: usize,
}

/// `Σ_faces |∂h|²/2 dx + Σ_cells g(Γ_j) dx`.
pub fn energy(state: &GridState, g: &FreeEnergy) -> f64 {
    let mesh = state.mesh();
    let (n, dx) = (mesh.n(), mesh.dx());
    let mut d1 = vec![0.0; n + 1];
    d1_face(state.h.values(), dx, &mut d1);
    let surface: f64 = d1.iter().map(|d| 0.5 * d * d).sum::<f64>() * dx;
    let bulk: f64 = state.gamma.values().iter().map(|&s| g.value(s)).sum::<f64>() * dx;
    surface + bulk
}

fn mean(v: &[f64], j: usize) -> f64 {
    0.5 * (v[j - 1] + v[j])
}

/// Physical dissipation terms with the base tension `σ`.
pub fn dissipation(state: &GridState, cfg: &SolverConfig, sigma: &dyn Tension, theta: f64) -> DissipationTerms {
    let mesh = state.mesh();
    let (n, dx) = (mesh.n(), mesh.dx());
    let (h, gam) = (state.h.values(), state.gamma.values());
    let mut d3 = vec![0.0; n + 1];
    d3_face(h, dx, &mut d3);
    let sig: Vec<f64> = gam.iter().map(|&s| sigma.value(s)).collect();
    let mut out = DissipationTerms {
        cap: 0.0,
        mar: 0.0,
        dif: 0.0,
        diss_theta: 0.0,
        flagged: 0,
    };
    for j in 1..n {
        let hb = mean(h, j).max(0.0);
        let gb = mean(gam, j);
        let ds = (sig[j] - sig[j - 1]) / dx;
        let dg = (gam[j] - gam[j - 1]) / dx;
        out.cap += hb.powi(3) / 21.0 * d3[j] * d3[j];
        out.mar += hb / 8.0 * ds * ds;
        if dg == 0.0 {
            continue;
        }
        if gam[j - 1].min(gam[j]) < GAMMA_FLOOR {
            out.flagged += 1;
            continue;
        }
        out.dif += -cfg.d * sigma.slope(gb) / gb * dg * dg;
        out.diss_theta += dg * dg / (gb * (1.0 + gb).powf(theta));
    }
    out.cap *= dx;
    out.mar *= dx;
    out.dif *= dx;
    out.diss_theta *= dx;
    out
}

/// Floor-weighted dissipation with the driving tension of `model`.
pub fn regularized_dissipation(state: &GridState, cfg: &SolverConfig, model: &Model) -> RegularizedDissipation {
    let mesh = state.mesh();
    let (n, dx) = (mesh.n(), mesh.dx());
    let (h, gam) = (state.h.values(), state.gamma.values());
    let mut d3 = vec![0.0; n + 1];
    d3_face(h, dx, &mut d3);
    let sig: Vec<f64> = gam.iter().map(|&s| model.drive().value(s)).collect();
    let mut out = RegularizedDissipation {
        cap: 0.0,
        mar: 0.0,
        dif: 0.0,
    };
    for j in 1..n {
        let hb = mean(h, j);
        let gb = mean(gam, j);
        let ds = (sig[j] - sig[j - 1]) / dx;
        let dg = (gam[j] - gam[j - 1]) / dx;
        out.cap += (model.floor() + mobility(3, hb) / 7.0) * d3[j] * d3[j];
        out.mar += mobility(1, hb) / 8.0 * ds * ds;
        if dg != 0.0 && gam[j - 1].min(gam[j]) >= GAMMA_FLOOR {
            out.dif += -cfg.d * model.base().sigma_prime(gb).unwrap_or(0.0) / gb * dg * dg;
        }
    }
    out.cap *= dx;
    out.mar *= dx;
    out.dif *= dx;
    out
}

/// `J_f`, `J_s` on the `n + 1` faces; boundary faces are zero.
pub fn fluxes_jf_js(state: &GridState, sigma: &dyn Tension) -> (Vec<f64>, Vec<f64>) {
    let mesh = state.mesh();
    let (n, dx) = (mesh.n(), mesh.dx());
    let (h, gam) = (state.h.values(), state.gamma.values());
    let mut d3 = vec![0.0; n + 1];
    d3_face(h, dx, &mut d3);
    let mut jf = vec![0.0; n + 1];
    let mut js = vec![0.0; n + 1];
    for j in 1..n {
        let hb = mean(h, j).max(0.0);
        let ds = (sigma.value(gam[j]) - sigma.value(gam[j - 1])) / dx;
        let (f, s) = jf_js(hb, d3[j], ds);
        jf[j] = f;
        js[j] = s;
    }
    (jf, js)
}

/// `(J_f, J_s)` at one point from `h`, `∂³h` and `∂σ`.
pub fn jf_js(h: f64, d3: f64, ds: f64) -> (f64, f64) {
    let r = h.max(0.0).sqrt();
    let r3 = r * r * r;
    (r3 / 3.0 * d3 + r / 2.0 * ds, r3 / 2.0 * d3 + r * ds)
}

/// Both sides of the pointwise flux identity:
/// `(3/2)J_f² + ½J_s² + h³/24 |∂³h|² + h/8 |∂σ|²` and
/// `h³/3 |∂³h|² + h² ∂σ ∂³h + h |∂σ|²`.
pub fn flux_identity(h: f64, d3: f64, ds: f64) -> (f64, f64) {
    let (jf, js) = jf_js(h, d3, ds);
    let h = h.max(0.0);
    let lhs = 1.5 * jf * jf + 0.5 * js * js + h.powi(3) / 24.0 * d3 * d3 + h / 8.0 * ds * ds;
    let rhs = h.powi(3) / 3.0 * d3 * d3 + h * h * ds * d3 + h * ds * ds;
    (lhs, rhs)
}

fn l2_faces(v: &[f64], dx: f64) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() * dx).sqrt()
}

/// Piecewise-linear reconstruction through the cell centers, constant on the
/// two half cells at the ends.
struct Reconstruction<'a> {
    values: &'a [f64],
    dx: f64,
}

impl Reconstruction<'_> {
    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let p = x / self.dx - 0.5;
        if p <= 0.0 {
            return self.values[0];
        }
        if p >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = (p.floor() as usize).min(n - 2);
        let w = p - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}

/// Audits the Hölder embedding bound on the piecewise-linear reconstruction
/// of `gamma`, using all adjacent center pairs plus `pair_samples` random
/// pairs drawn from `rng`.
pub fn embedding_audit<R: Rng>(gamma: &Field, theta: f64, pair_samples: usize, rng: &mut R) -> Result<EmbeddingAudit> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Argument(format!("embedding audit needs θ in [0, 1), got {theta}")));
    }
    let v = gamma.values();
    if let Some(bad) = v.iter().find(|&&s| !(s >= -1e-12)) {
        return Err(Error::Domain(format!("embedding audit needs Γ ≥ 0, got {bad}")));
    }
    let vals: Vec<f64> = v.iter().map(|&s| s.max(0.0)).collect();
    let n = vals.len();
    let dx = gamma.mesh().dx();

    // Exact integrals of the reconstruction.
    let mut l1 = 0.5 * dx * (vals[0] + vals[n - 1]);
    let mut g = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        l1 += 0.5 * dx * (a + b);
        if a == b {
            continue;
        }
        let m = (b - a) / dx;
        g += if theta == 0.0 {
            m * ((1.0 + b) / (1.0 + a)).ln()
        } else {
            m * ((1.0 + a).powf(-theta) - (1.0 + b).powf(-theta)) / theta
        };
    }
    let g = g.max(0.0);

    let rec = Reconstruction { values: &vals, dx };
    let scale = g.sqrt() * (1.0 + l1).powf(0.5 * theta);
    let expo = 0.5 * (1.0 - theta);
    let ratio = |x: f64, y: f64| {
        let num = ((1.0 + rec.eval(x)).sqrt() - (1.0 + rec.eval(y)).sqrt()).abs();
        if num == 0.0 {
            0.0
        } else {
            num / (scale * (y - x).abs().powf(expo))
        }
    };
    let mut worst: f64 = 0.0;
    for i in 0..n - 1 {
        worst = worst.max(ratio((i as f64 + 0.5) * dx, (i as f64 + 1.5) * dx));
    }
    let mut pairs = n - 1;
    for _ in 0..pair_samples {
        let x: f64 = rng.random();
        let y: f64 = rng.random();
        if x != y {
            worst = worst.max(ratio(x, y));
            pairs += 1;
        }
    }
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let sup_ratio = (1.0 + max).sqrt() / ((1.0 + l1).sqrt() + scale);
    Ok(EmbeddingAudit {
        g,
        l1,
        worst_pair_ratio: worst,
        sup_ratio,
        pairs,
    })
}

/// Computes one record per state; owns the random stream of the embedding
/// audit so that a seeded run is reproducible.
#[derive(Debug, Clone)]
pub struct Recorder {
    rng: ChaCha8Rng,
    pair_factor: usize,
}

impl Recorder {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pair_factor: PAIR_FACTOR,
        }
    }

    pub fn with_pair_factor(mut self, factor: usize) -> Self {
        self.pair_factor = factor;
        self
    }

    pub fn record(
        &mut self,
        state: &GridState,
        cfg: &SolverConfig,
        model: &Model,
        dt: f64,
        newton_iters: usize,
    ) -> Result<DiagnosticsRecord> {
        let mesh = state.mesh();
        let (n, dx) = (mesh.n(), mesh.dx());
        let base = model.base();
        let (h, gam) = (state.h.values(), state.gamma.values());

        let diss = dissipation(state, cfg, base, base.theta);
        let regularized = regularized_dissipation(state, cfg, model);
        let (jf, js) = fluxes_jf_js(state, base);

        let mut d3 = vec![0.0; n + 1];
        d3_face(h, dx, &mut d3);
        let mut identity = 0.0;
        for j in 1..n {
            let hb = mean(h, j).max(0.0);
            let ds = (base.value(gam[j]) - base.value(gam[j - 1])) / dx;
            identity += flux_identity(hb, d3[j], ds).0;
        }
        identity = identity * dx + diss.dif;

        let ev = CellEval::new(model, gam);
        let f = faces(model, cfg.d, cfg.gamma_transport, h, gam, &ev, dx);
        let mut scheme = 0.0;
        for j in 1..n {
            scheme += f.fh[j] * f.d3[j] - f.fg[j] * (ev.dg[j] - ev.dg[j - 1]) / dx;
        }

        let holder = embedding_audit(&state.gamma, base.theta, self.pair_factor * n, &mut self.rng)?;
        Ok(DiagnosticsRecord {
            t: state.t,
            dt,
            mass_h: state.h.integral(),
            mass_gamma: state.gamma.integral(),
            energy: energy(state, model.energy()),
            dissipation: diss,
            regularized,
            identity_dissipation: identity,
            scheme_dissipation: scheme * dx,
            jf_norm: l2_faces(&jf, dx),
            js_norm: l2_faces(&js, dx),
            min_h: state.h.min(),
            min_gamma: state.gamma.min(),
            holder,
            newton_iters,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    pub m: usize,
    pub film: f64,
    pub surfactant: f64,
}

/// Residuals of both weak-form identities against
/// `ζ_m(t, x) = (1 − t/T) cos(mπx)`, `m < basis_size`, with `T` the final
/// time of the trajectory and trapezoid quadrature over the stored states.
pub fn weak_residual(traj: &Trajectory, cfg: &SolverConfig, model: &Model, basis_size: usize) -> Result<Vec<WeakResidual>> {
    let states: Vec<&GridState> = traj.states().collect();
    let t0 = states[0].t;
    let t_end = traj.last().t;
    if !(t_end > t0) {
        return Err(Error::Argument("weak residual needs a trajectory of positive length".into()));
    }
    let span = t_end - t0;
    let mesh = *states[0].mesh();
    let (n, dx) = (mesh.n(), mesh.dx());
    let pi = std::f64::consts::PI;

    // Per state: the advective fluxes on faces and the cell values.
    let fluxes: Vec<(Vec<f64>, Vec<f64>)> = states
        .iter()
        .map(|s| {
            let (h, g) = (s.h.values(), s.gamma.values());
            let ev = CellEval::new(model, g);
            let mut f = faces(model, cfg.d, cfg.gamma_transport, h, g, &ev, dx);
            for j in 1..n {
                f.fg[j] += cfg.d * (g[j] - g[j - 1]) / dx;
            }
            (f.fh, f.fg)
        })
        .collect();

    let mut out = Vec::with_capacity(basis_size);
    for m in 0..basis_size {
        let w = m as f64 * pi;
        let cos_c: Vec<f64> = (0..n).map(|j| (w * mesh.center(j)).cos()).collect();
        let sin_f: Vec<f64> = (0..=n).map(|j| (w * mesh.face(j)).sin()).collect();
        let integrand = |i: usize| {
            let s = states[i];
            let a = 1.0 - (s.t - t0) / span;
            let (fh, fg) = (&fluxes[i].0, &fluxes[i].1);
            let (h, g) = (s.h.values(), s.gamma.values());
            let mut ih = 0.0;
            let mut ig = 0.0;
            for j in 0..n {
                // ζ_t = −cos/T, ζ_xx = −(mπ)² a cos.
                ih += h[j] * (-cos_c[j] / span);
                ig += g[j] * (-cos_c[j] / span) + cfg.d * g[j] * (-w * w * a * cos_c[j]);
            }
            for j in 1..n {
                let zx = -a * w * sin_f[j];
                ih += fh[j] * zx;
                ig += fg[j] * zx;
            }
            (ih * dx, ig * dx)
        };
        let mut acc_h = 0.0;
        let mut acc_g = 0.0;
        let mut prev = integrand(0);
        for i in 1..states.len() {
            let cur = integrand(i);
            let dt = states[i].t - states[i - 1].t;
            acc_h += 0.5 * dt * (prev.0 + cur.0);
            acc_g += 0.5 * dt * (prev.1 + cur.1);
            prev = cur;
        }
        let (h0, g0) = (states[0].h.values(), states[0].gamma.values());
        let init_h: f64 = h0.iter().zip(&cos_c).map(|(a, b)| a * b).sum::<f64>() * dx;
        let init_g: f64 = g0.iter().zip(&cos_c).map(|(a, b)| a * b).sum::<f64>() * dx;
        out.push(WeakResidual {
            m,
            film: (acc_h + init_h).abs(),
            surfactant: (acc_g + init_g).abs(),
        });
    }
    Ok(out)
}
