use serde::Serialize;

use super::Tension;
use crate::error::{Error, Result};
use crate::interp::{hermite, locate};
use crate::quadrature::adaptive_gauss;

/// Smallest tabulated concentration; below it `g` is continued linearly to
/// its limit value `g(0+) = σ(0) − σ(1)`.
pub const DEFAULT_FLOOR: f64 = 1e-8;

const GROWTH: f64 = 1.25;
const MAX_NODES: usize = 400_000;
/// Slopes feed the discrete chain rule in the solver, so they are refined to
/// `SLOPE_FACTOR * tol / min(s, 1)` as well.
const SLOPE_FACTOR: f64 = 10.0;

/// Tabulated free energy `g` with `g(1) = g'(1) = 0` and `g''(s) = −σ'(s)/s`.
///
/// Between nodes `g` is the cubic Hermite interpolant of the exact node values
/// and slopes, and [`FreeEnergy::slope`] is the derivative of that same
/// interpolant, so `value` and `slope` are exactly consistent.
#[derive(Debug, Clone)]
pub struct FreeEnergy {
    nodes: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
    g_zero: f64,
    tail_curvature: f64,
    tol: f64,
    max_error: f64,
    closed: Option<ClosedForm>,
}

/// Free energies known in closed form; evaluation bypasses the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `g(s) = s ln s − s + 1`, from `σ' ≡ −1`.
    Entropy,
    /// `g(s) = s³/6 − s/2 + 1/3`, from `σ'(s) = −s²`.
    Cubic,
}

impl ClosedForm {
    fn eval(self, s: f64) -> (f64, f64, f64) {
        match self {
            ClosedForm::Entropy => {
                if s <= 0.0 {
                    // Continuous at 0 with g(0) = 1; slope −∞ is replaced by the
                    // secant convention of the tabulated path.
                    let floor = DEFAULT_FLOOR;
                    let secant = (floor * floor.ln() - floor) / floor;
                    (1.0 + secant * s, secant, 0.0)
                } else {
                    (s * s.ln() - s + 1.0, s.ln(), 1.0 / s)
                }
            }
            ClosedForm::Cubic => (s * s * s / 6.0 - 0.5 * s + 1.0 / 3.0, 0.5 * (s * s - 1.0), s),
        }
    }
}

fn march<T: Tension + ?Sized>(t: &T, a: f64, ga: f64, dga: f64, b: f64, qtol: f64) -> Result<(f64, f64)> {
    let gpp = |r: f64| -t.slope(r) / r;
    let d = adaptive_gauss(gpp, a, b, qtol)?;
    let rem = adaptive_gauss(|r| (b - r) * gpp(r), a, b, qtol)?;
    Ok((ga + dga * (b - a) + rem, dga + d))
}

impl FreeEnergy {
    /// Builds the table on `[DEFAULT_FLOOR, s_max]` so that the interpolant is
    /// within `tol` of the exact free energy at every interval midpoint.
    pub fn build<T: Tension + ?Sized>(t: &T, s_max: f64, tol: f64) -> Result<Self> {
        Self::build_with(t, s_max, tol, None)
    }

    /// As [`FreeEnergy::build`], but evaluation uses `closed` instead of the table.
    pub fn build_with<T: Tension + ?Sized>(
        t: &T,
        s_max: f64,
        tol: f64,
        closed: Option<ClosedForm>,
    ) -> Result<Self> {
        if !(s_max > 1.0 && s_max.is_finite()) {
            return Err(Error::Argument(format!("s_max must exceed 1, got {s_max}")));
        }
        if !(tol > 0.0) {
            return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
        }
        let qtol = (tol * 1e-4).max(1e-16);

        // Geometric skeleton through s = 1.
        let mut left = vec![1.0];
        while *left.last().unwrap() > DEFAULT_FLOOR * GROWTH {
            left.push(left.last().unwrap() / GROWTH);
        }
        left.push(DEFAULT_FLOOR);
        let mut right = vec![1.0];
        while *right.last().unwrap() * GROWTH < s_max {
            right.push(right.last().unwrap() * GROWTH);
        }
        right.push(s_max);

        let mut nodes = Vec::with_capacity(left.len() + right.len());
        let mut g = Vec::with_capacity(nodes.capacity());
        let mut dg = Vec::with_capacity(nodes.capacity());

        let mut tmp = vec![(1.0, 0.0, 0.0)];
        for w in left.windows(2) {
            let &(a, ga, dga) = tmp.last().unwrap();
            let (gb, dgb) = march(t, a, ga, dga, w[1], qtol)?;
            tmp.push((w[1], gb, dgb));
        }
        for &(s, gs, dgs) in tmp.iter().rev() {
            nodes.push(s);
            g.push(gs);
            dg.push(dgs);
        }
        let (mut a, mut ga, mut dga) = (1.0, 0.0, 0.0);
        for &b in &right[1..] {
            let (gb, dgb) = march(t, a, ga, dga, b, qtol)?;
            nodes.push(b);
            g.push(gb);
            dg.push(dgb);
            (a, ga, dga) = (b, gb, dgb);
        }

        if g.iter().chain(&dg).any(|v| !v.is_finite()) {
            return Err(Error::NonIntegrable(format!(
                "free energy diverges near s = {DEFAULT_FLOOR:e}"
            )));
        }

        // Split intervals until the Hermite midpoint matches the exact value.
        let mut max_error;
        loop {
            let mut out_nodes = Vec::with_capacity(nodes.len() * 2);
            let mut out_g = Vec::with_capacity(nodes.len() * 2);
            let mut out_dg = Vec::with_capacity(nodes.len() * 2);
            let mut split = false;
            max_error = 0.0_f64;
            for i in 0..nodes.len() - 1 {
                out_nodes.push(nodes[i]);
                out_g.push(g[i]);
                out_dg.push(dg[i]);
                let (a, b) = (nodes[i], nodes[i + 1]);
                let m = 0.5 * (a + b);
                let (gm, dgm) = march(t, a, g[i], dg[i], m, qtol)?;
                let (hm, _, _) = hermite(a, b, g[i], g[i + 1], dg[i], dg[i + 1], m);
                let err = (hm - gm).abs();
                max_error = max_error.max(err);
                // The slope error vanishes at the midpoint to leading order, so
                // it is sampled at the quarter point.
                let q = a + 0.25 * (b - a);
                let (_, dgq) = march(t, a, g[i], dg[i], q, qtol)?;
                let (_, dhq, _) = hermite(a, b, g[i], g[i + 1], dg[i], dg[i + 1], q);
                let slope_noise = 64.0 * f64::EPSILON * (g[i].abs() + g[i + 1].abs()) / (b - a);
                let slope_tol = (SLOPE_FACTOR * tol / q.min(1.0)).max(slope_noise);
                if err > 0.5 * tol || (dhq - dgq).abs() > slope_tol {
                    out_nodes.push(m);
                    out_g.push(gm);
                    out_dg.push(dgm);
                    split = true;
                }
            }
            let last = nodes.len() - 1;
            out_nodes.push(nodes[last]);
            out_g.push(g[last]);
            out_dg.push(dg[last]);
            nodes = out_nodes;
            g = out_g;
            dg = out_dg;
            if !split {
                break;
            }
            if nodes.len() > MAX_NODES {
                return Err(Error::NonIntegrable(format!(
                    "free energy table exceeded {MAX_NODES} nodes before reaching tolerance {tol:e}"
                )));
            }
        }

        let g_zero = t.value(0.0) - t.value(1.0);
        if !g_zero.is_finite() {
            return Err(Error::NonIntegrable("g(0+) is not finite".into()));
        }
        let tail_curvature = (-t.slope(s_max) / s_max).max(0.0);
        Ok(Self {
            nodes,
            g,
            dg,
            g_zero,
            tail_curvature,
            tol,
            max_error,
            closed,
        })
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed
    }

    pub fn floor(&self) -> f64 {
        self.nodes[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Largest midpoint discrepancy observed in the final refinement pass.
    pub fn max_error(&self) -> f64 {
        self.max_error
    }

    /// Limit value `g(0+)`.
    pub fn value_at_zero(&self) -> f64 {
        self.g_zero
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_values(&self) -> &[f64] {
        &self.g
    }

    pub fn node_slopes(&self) -> &[f64] {
        &self.dg
    }

    /// `(g, g', g'')` at `s`: the closed form when one is attached, otherwise
    /// the interpolant.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        match self.closed {
            Some(c) => c.eval(s),
            None => self.table_eval(s),
        }
    }

    /// `(g, g', g'')` of the tabulated interpolant at `s`.
    pub fn table_eval(&self, s: f64) -> (f64, f64, f64) {
        let floor = self.nodes[0];
        let n = self.nodes.len();
        if s < floor {
            let secant = (self.g[0] - self.g_zero) / floor;
            return (self.g_zero + secant * s, secant, 0.0);
        }
        let s_max = self.nodes[n - 1];
        if s > s_max {
            let d = s - s_max;
            let c = self.tail_curvature;
            return (
                self.g[n - 1] + self.dg[n - 1] * d + 0.5 * c * d * d,
                self.dg[n - 1] + c * d,
                c,
            );
        }
        let i = locate(&self.nodes, s);
        hermite(
            self.nodes[i],
            self.nodes[i + 1],
            self.g[i],
            self.g[i + 1],
            self.dg[i],
            self.dg[i + 1],
            s,
        )
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).0
    }

    pub fn slope(&self, s: f64) -> f64 {
        self.eval(s).1
    }
}

/// Empirical constants of the convexity/growth conditions on `g''`:
/// `g'' ≥ c_g` and `g'' ≤ C_g (s^r + 1)` over the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBoundReport {
    pub c_g: f64,
    pub upper_constant: f64,
    pub exponent: f64,
}

impl EnergyBoundReport {
    /// `exponent` is the least-squares log-log slope of `g''` over samples with
    /// `s ≥ 2`, clipped at zero.
    pub fn audit<T: Tension + ?Sized>(t: &T, samples: &[f64]) -> Result<Self> {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| (s, -t.slope(s) / s))
            .collect();
        if pts.is_empty() {
            return Err(Error::Argument("energy bound audit needs positive samples".into()));
        }
        let c_g = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let tail: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.0 >= 2.0 && p.1 > 0.0)
            .map(|p| (p.0.ln(), p.1.ln()))
            .collect();
        let exponent = if tail.len() >= 2 {
            let n = tail.len() as f64;
            let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
            let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (sxy / sxx).max(0.0)
        } else {
            0.0
        };
        let upper_constant = pts
            .iter()
            .map(|p| p.1 / (p.0.powf(exponent) + 1.0))
            .fold(0.0, f64::max);
        Ok(Self {
            c_g,
            upper_constant,
            exponent,
        })
    }
}
