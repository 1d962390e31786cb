use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss, GaussLegendre};

/// Nodes of the convolution rule; 96 points integrate the bump to roundoff.
const CONV_NODES: usize = 96;

fn bump(y: f64) -> f64 {
    if y.abs() < 1.0 {
        (-1.0 / (1.0 - y * y)).exp()
    } else {
        0.0
    }
}

struct Shared {
    norm: f64,
    rule: GaussLegendre,
    /// `w_i χ(y_i)` for the unsplit rule on `[-1, 1]`.
    weighted: Vec<f64>,
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let mass = adaptive_gauss(bump, -1.0, 1.0, 1e-16).expect("bump integral converges");
        let norm = 1.0 / mass;
        let rule = GaussLegendre::new(CONV_NODES);
        let weighted = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&y, &w)| w * norm * bump(y))
            .collect();
        Shared { norm, rule, weighted }
    })
}

/// Normalizing constant `C` of `χ(y) = C exp(−1/(1−y²))`.
pub fn bump_normalization() -> f64 {
    shared().norm
}

/// `χ_ε(x) = ε⁻¹ χ(x/ε)`.
pub fn mollifier_eval(eps: f64, x: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Argument(format!("mollifier width must be positive, got {eps}")));
    }
    Ok(shared().norm * bump(x / eps) / eps)
}

/// `(χ_ε * f)(s) = ∫ f(s − εu) χ(u) du`.
///
/// `breaks` lists points where `f` or its derivative jumps; the integral is
/// split there so each piece sees a smooth integrand.
pub fn convolve<F: Fn(f64) -> f64>(f: F, s: f64, eps: f64, breaks: &[f64]) -> f64 {
    let sh = shared();
    let mut cuts: Vec<f64> = breaks
        .iter()
        .map(|&b| (s - b) / eps)
        .filter(|u| u.abs() < 1.0)
        .collect();
    if cuts.is_empty() {
        return sh
            .rule
            .nodes()
            .iter()
            .zip(&sh.weighted)
            .map(|(&u, &w)| w * f(s - eps * u))
            .sum();
    }
    cuts.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    let mut lo = -1.0;
    for hi in cuts.into_iter().chain(std::iter::once(1.0)) {
        if hi > lo {
            acc += sh.rule.integrate(|u| sh.norm * bump(u) * f(s - eps * u), lo, hi);
        }
        lo = hi;
    }
    acc
}
