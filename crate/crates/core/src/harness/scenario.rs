//! Initial data and the manufactured solution.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};
use crate::quadrature::adaptive_gauss;
use crate::solver::{GridState, Source};

use super::config::Scenario;

/// Drop: `h0 = 0.3 + 0.1 cos πx`, `Γ0 = 1 + 0.5 cos πx`.
pub fn s1_drop(mesh: Mesh) -> GridState {
    let h = mesh.sample(|x| 0.3 + 0.1 * (PI * x).cos());
    let g = mesh.sample(|x| 1.0 + 0.5 * (PI * x).cos());
    GridState::new(h, g, 0.0).expect("same mesh")
}

/// Surfactant pulse: `h0 = 0.5`, `Γ0` the cell averages of `1 + exp(−50(x − ½)²)`.
pub fn s2_surfactant_pulse(mesh: Mesh) -> GridState {
    let dx = mesh.dx();
    let pulse = |x: f64| 1.0 + (-50.0 * (x - 0.5) * (x - 0.5)).exp();
    let values = (0..mesh.n())
        .map(|j| {
            let a = mesh.face(j);
            adaptive_gauss(pulse, a, a + dx, 1e-15).expect("smooth integrand") / dx
        })
        .collect();
    let g = Field::new(mesh, values).expect("finite averages");
    GridState::new(Field::constant(mesh, 0.5), g, 0.0).expect("same mesh")
}

/// Manufactured profiles `h* = 2 + e^{−t} cos πx`, `Γ* = 1 + ½ e^{−t} cos πx`.
pub fn mms_exact(t: f64, x: f64) -> (f64, f64) {
    let ec = (-t).exp() * (PI * x).cos();
    (2.0 + ec, 1.0 + 0.5 * ec)
}

pub fn mms_initial(mesh: Mesh) -> GridState {
    let h = mesh.sample(|x| mms_exact(0.0, x).0);
    let g = mesh.sample(|x| mms_exact(0.0, x).1);
    GridState::new(h, g, 0.0).expect("same mesh")
}

/// Sources making the manufactured profiles exact for `σ = 1 − Γ`.
pub fn mms_source(d: f64) -> Source {
    Arc::new(move |t: f64, x: f64| {
        let e = (-t).exp();
        let (c, s) = ((PI * x).cos(), (PI * x).sin());
        let p2 = PI * PI;
        let h = 2.0 + e * c;
        let hx = -PI * e * s;
        let hxxx = p2 * PI * e * s;
        let hxxxx = p2 * p2 * e * c;
        let g = 1.0 + 0.5 * e * c;
        let gx = -0.5 * PI * e * s;
        let gxx = -0.5 * p2 * e * c;
        let sx = -gx;
        let sxx = -gxx;
        let ht = -e * c;
        let gt = -0.5 * e * c;
        let sh = ht + h * h * hx * hxxx + h.powi(3) / 3.0 * hxxxx + h * hx * sx + 0.5 * h * h * sxx;
        let sg = gt
            + h * hx * g * hxxx
            + 0.5 * h * h * gx * hxxx
            + 0.5 * h * h * g * hxxxx
            + hx * g * sx
            + h * gx * sx
            + h * g * sxx
            - d * gxx;
        (sh, sg)
    })
}

/// Reads `x,h,gamma` rows; the cell count is the row count.
pub fn load_initial(path: &Path) -> Result<GridState> {
    let csv_err = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| csv_err(format!("missing column `{name}`")))
    };
    let (ih, ig) = (col("h")?, col("gamma")?);
    let mut h = Vec::new();
    let mut g = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let parse = |i: usize| {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| csv_err(format!("row {row}: {e}")))
        };
        h.push(parse(ih)?);
        g.push(parse(ig)?);
    }
    let mesh = Mesh::new(h.len())?;
    if h.iter().chain(&g).any(|&v| v < 0.0) {
        return Err(csv_err("initial data must be nonnegative".into()));
    }
    GridState::new(Field::new(mesh, h)?, Field::new(mesh, g)?, 0.0)
}

/// Initial state of a scenario; `custom` reads `initial_data` and ignores `n`.
pub fn scenario_init(s: Scenario, mesh: Mesh, initial_data: Option<&Path>) -> Result<GridState> {
    match s {
        Scenario::S1Drop => Ok(s1_drop(mesh)),
        Scenario::S2SurfactantPulse => Ok(s2_surfactant_pulse(mesh)),
        Scenario::Mms => Ok(mms_initial(mesh)),
        Scenario::Custom => {
            let path = initial_data.ok_or_else(|| Error::config("initial_data", "required for the custom scenario"))?;
            load_initial(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s1_masses_and_bounds() {
        let st = s1_drop(Mesh::new(128).unwrap());
        assert!((st.h.integral() - 0.3).abs() <= 1e-14);
        assert!((st.gamma.integral() - 1.0).abs() <= 1e-14);
        assert!(st.h.min() >= 0.2 - 1e-14);
        assert!(st.gamma.min() >= 0.0);
    }

    #[test]
    fn s2_is_positive_with_exact_mass() {
        let st = s2_surfactant_pulse(Mesh::new(64).unwrap());
        assert!(st.gamma.min() > 1.0);
        let exact = 1.0 + (PI / 50.0).sqrt() * libm_erf(0.5 * 50f64.sqrt());
        assert!((st.gamma.integral() - exact).abs() < 1e-12);
    }

    // erf by its Maclaurin series, adequate at the argument used above.
    fn libm_erf(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / PI.sqrt() * sum
    }

    // Independent oracle: the continuous operator applied to the exact
    // profiles by central differences, Richardson-extrapolated in the step.
    fn operator_by_differences(d: f64, t: f64, x: f64, step: f64) -> (f64, f64) {
        let sigma = |g: f64| 1.0 - g;
        let dx = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + step) - f(x - step)) / (2.0 * step);
        let h = |x: f64| mms_exact(t, x).0;
        let g = |x: f64| mms_exact(t, x).1;
        let hxxx = |x: f64| {
            (h(x + 2.0 * step) - 2.0 * h(x + step) + 2.0 * h(x - step) - h(x - 2.0 * step)) / (2.0 * step.powi(3))
        };
        let fh = |x: f64| h(x).powi(3) / 3.0 * hxxx(x) + h(x).powi(2) / 2.0 * dx(&|y| sigma(g(y)), x);
        let fg = |x: f64| {
            h(x).powi(2) / 2.0 * g(x) * hxxx(x) + h(x) * g(x) * dx(&|y| sigma(g(y)), x) - d * dx(&g, x)
        };
        let tstep = 1e-5;
        let ht = (mms_exact(t + tstep, x).0 - mms_exact(t - tstep, x).0) / (2.0 * tstep);
        let gt = (mms_exact(t + tstep, x).1 - mms_exact(t - tstep, x).1) / (2.0 * tstep);
        (ht + dx(&fh, x), gt + dx(&fg, x))
    }

    #[test]
    fn mms_sources_match_finite_differences() {
        let d = 0.1;
        let src = mms_source(d);
        for &(t, x) in &[(0.0, 0.3), (0.2, 0.71), (1.0, 0.45)] {
            let coarse = operator_by_differences(d, t, x, 4e-3);
            let fine = operator_by_differences(d, t, x, 2e-3);
            let oh = (4.0 * fine.0 - coarse.0) / 3.0;
            let og = (4.0 * fine.1 - coarse.1) / 3.0;
            let (sh, sg) = src(t, x);
            assert!((oh - sh).abs() < 1e-5 * sh.abs().max(1.0), "film source at ({t}, {x}): {oh} vs {sh}");
            assert!((og - sg).abs() < 1e-5 * sg.abs().max(1.0), "surfactant source at ({t}, {x}): {og} vs {sg}");
        }
    }
}
