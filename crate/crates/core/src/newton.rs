//! Newton iteration with a finite-difference Jacobian assembled by coloring.
//!
//! Unknowns are interleaved per cell (`blocks` variables per cell) and the
//! residual of a cell may depend on cells within `half_width` of it.

use serde::{Deserialize, Serialize};

use crate::banded::{Banded, BandedLu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NewtonDiverged,
    NegativityViolated,
    ResidualStalled,
}

#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub cells: usize,
    pub blocks: usize,
    pub half_width: usize,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.cells * self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    /// Sub- and super-diagonal count of the Jacobian.
    pub fn bandwidth(&self) -> usize {
        self.blocks * (self.half_width + 1) - 1
    }

    fn colors(&self) -> usize {
        (2 * self.half_width + 1) * self.blocks
    }

    fn color(&self, i: usize) -> usize {
        let cell = i / self.blocks;
        (cell % (2 * self.half_width + 1)) * self.blocks + i % self.blocks
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Residual is multiplied by this before scaling (the time step).
    pub residual_scale: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub reason: Option<RejectReason>,
}

/// `scale · max_b ‖R_b‖∞ / max(1, ‖u_b‖∞)` over the variable blocks.
pub fn scaled_norm(layout: &Layout, scale: f64, r: &[f64], u: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for b in 0..layout.blocks {
        let mut rn = 0.0_f64;
        let mut un = 0.0_f64;
        for c in 0..layout.cells {
            let i = c * layout.blocks + b;
            rn = rn.max(r[i].abs());
            un = un.max(u[i].abs());
        }
        if rn.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(scale * rn / un.max(1.0));
    }
    worst
}

/// Finite-difference Jacobian of `residual` at `u`, given `r = residual(u)`.
pub fn jacobian<F>(layout: &Layout, u: &[f64], r: &[f64], residual: &mut F) -> Banded
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = layout.len();
    let bw = layout.bandwidth();
    let mut jac = Banded::zeros(n, bw, bw);
    let mut up = u.to_vec();
    let mut rp = vec![0.0; n];
    let mut steps = vec![0.0; n];
    let root_eps = f64::EPSILON.sqrt();
    for color in 0..layout.colors() {
        let mut any = false;
        for i in (0..n).filter(|&i| layout.color(i) == color) {
            let e = root_eps * u[i].abs().max(1.0);
            up[i] = u[i] + e;
            steps[i] = up[i] - u[i];
            any = true;
        }
        if !any {
            continue;
        }
        residual(&up, &mut rp);
        for i in (0..n).filter(|&i| layout.color(i) == color) {
            let cell = i / layout.blocks;
            let lo = cell.saturating_sub(layout.half_width) * layout.blocks;
            let hi = ((cell + layout.half_width + 1).min(layout.cells)) * layout.blocks;
            for row in lo..hi {
                if jac.in_band(row, i) {
                    jac.set(row, i, (rp[row] - r[row]) / steps[i]);
                }
            }
            up[i] = u[i];
        }
    }
    jac
}

/// Solves `residual(u) = 0` in place starting from `u`.
///
/// After convergence one further correction reuses the last factorization;
/// for residuals whose cell sums telescope this restores exact conservation.
pub fn solve<F>(layout: &Layout, u: &mut [f64], mut residual: F, opts: &NewtonOptions) -> NewtonReport
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = layout.len();
    let mut r = vec![0.0; n];
    let mut lu: Option<BandedLu> = None;
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        residual(u, &mut r);
        let norm = scaled_norm(layout, opts.residual_scale, &r, u);
        if !norm.is_finite() {
            return report(false, iterations, norm, Some(RejectReason::NewtonDiverged));
        }
        if norm <= opts.tol {
            if r.iter().any(|&v| v != 0.0) {
                if lu.is_none() {
                    lu = jacobian(layout, u, &r, &mut residual).factor().ok();
                }
                if let Some(f) = &lu {
                    let mut d: Vec<f64> = r.iter().map(|v| -v).collect();
                    f.solve(&mut d);
                    if d.iter().all(|v| v.is_finite()) {
                        for (x, dx) in u.iter_mut().zip(&d) {
                            *x += dx;
                        }
                    }
                }
            }
            return report(true, iterations, norm, None);
        }
        if iterations >= opts.max_iter {
            return report(false, iterations, norm, Some(RejectReason::NewtonDiverged));
        }
        history.push(norm);
        if history.len() >= 4 {
            let h = &history[history.len() - 4..];
            if h.windows(2).all(|w| w[1] > 0.9 * w[0]) {
                return report(false, iterations, norm, Some(RejectReason::ResidualStalled));
            }
        }
        let factored = match jacobian(layout, u, &r, &mut residual).factor() {
            Ok(f) => f,
            Err(_) => return report(false, iterations, norm, Some(RejectReason::NewtonDiverged)),
        };
        let mut d: Vec<f64> = r.iter().map(|v| -v).collect();
        factored.solve(&mut d);
        if d.iter().any(|v| !v.is_finite()) {
            return report(false, iterations, norm, Some(RejectReason::NewtonDiverged));
        }
        for (x, dx) in u.iter_mut().zip(&d) {
            *x += dx;
        }
        lu = Some(factored);
        iterations += 1;
    }
}

fn report(converged: bool, iterations: usize, residual: f64, reason: Option<RejectReason>) -> NewtonReport {
    NewtonReport {
        converged,
        iterations,
        residual,
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Discrete `u − 0.1 Δu + u³ = f` with Neumann ends; bandwidth one cell.
    fn problem(u: &[f64], r: &mut [f64]) {
        let n = u.len();
        for j in 0..n {
            let l = if j == 0 { u[0] } else { u[j - 1] };
            let rt = if j + 1 == n { u[n - 1] } else { u[j + 1] };
            r[j] = u[j] - 0.1 * (l - 2.0 * u[j] + rt) + u[j].powi(3) - 1.0 - 0.1 * j as f64;
        }
    }

    #[test]
    fn converges_quadratically_on_smooth_problem() {
        let layout = Layout {
            cells: 20,
            blocks: 1,
            half_width: 1,
        };
        let mut u = vec![0.0; 20];
        let opts = NewtonOptions {
            tol: 1e-12,
            max_iter: 30,
            residual_scale: 1.0,
        };
        let rep = solve(&layout, &mut u, problem, &opts);
        assert!(rep.converged, "{rep:?}");
        assert!(rep.iterations <= 10);
        let mut r = vec![0.0; 20];
        problem(&u, &mut r);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn colored_jacobian_matches_dense_differences() {
        let layout = Layout {
            cells: 12,
            blocks: 2,
            half_width: 2,
        };
        let mut f = |u: &[f64], r: &mut [f64]| {
            let c = 12;
            for j in 0..c {
                let get = |k: isize, b: usize| u[(k.clamp(0, c as isize - 1) as usize) * 2 + b];
                let j = j as isize;
                r[2 * j as usize] = get(j - 2, 0) * get(j + 2, 1) + get(j, 0).sin();
                r[2 * j as usize + 1] = get(j + 1, 0).powi(2) - get(j - 1, 1) * get(j, 1);
            }
        };
        let u: Vec<f64> = (0..24).map(|i| 0.3 + 0.05 * i as f64).collect();
        let mut r = vec![0.0; 24];
        f(&u, &mut r);
        let jac = jacobian(&layout, &u, &r, &mut f);
        for col in 0..24 {
            let mut up = u.clone();
            let e = 1e-7;
            up[col] += e;
            let mut rp = vec![0.0; 24];
            f(&up, &mut rp);
            for row in 0..24 {
                let dense = (rp[row] - r[row]) / e;
                assert!((dense - jac.get(row, col)).abs() < 1e-5, "({row},{col})");
            }
        }
    }

    #[test]
    fn zero_residual_needs_no_iterations() {
        let layout = Layout {
            cells: 8,
            blocks: 1,
            half_width: 1,
        };
        let mut u = vec![1.0; 8];
        let rep = solve(&layout, &mut u, |_u: &[f64], r: &mut [f64]| r.fill(0.0), &NewtonOptions {
            tol: 1e-10,
            max_iter: 5,
            residual_scale: 1.0,
        });
        assert!(rep.converged && rep.iterations == 0);
        assert!(u.iter().all(|&v| v == 1.0));
    }
}
