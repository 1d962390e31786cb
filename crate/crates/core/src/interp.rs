//! Piecewise cubic Hermite interpolation.

/// Hermite cubic on `[a, b]` with end values `fa`, `fb` and end slopes `da`, `db`.
/// Returns `(value, first derivative, second derivative)` at `x`.
#[inline]
pub fn hermite(a: f64, b: f64, fa: f64, fb: f64, da: f64, db: f64, x: f64) -> (f64, f64, f64) {
    let h = b - a;
    let t = (x - a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * fa + h10 * h * da + h01 * fb + h11 * h * db;

    let d00 = 6.0 * t2 - 6.0 * t;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = -6.0 * t2 + 6.0 * t;
    let d11 = 3.0 * t2 - 2.0 * t;
    let slope = (d00 * fa + d01 * fb) / h + d10 * da + d11 * db;

    let s00 = 12.0 * t - 6.0;
    let s10 = 6.0 * t - 4.0;
    let s01 = -12.0 * t + 6.0;
    let s11 = 6.0 * t - 2.0;
    let curvature = (s00 * fa + s01 * fb) / (h * h) + (s10 * da + s11 * db) / h;

    (value, slope, curvature)
}

/// Index `i` with `xs[i] <= x < xs[i + 1]`, clamped to the valid interval range.
pub fn locate(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let last = xs.len() - 2;
    match xs.binary_search_by(|probe| probe.total_cmp(&x)) {
        Ok(i) => i.min(last),
        Err(0) => 0,
        Err(i) => (i - 1).min(last),
    }
}

/// Fritsch–Carlson slopes: the Hermite interpolant through `(xs, ys)` with these
/// slopes is monotone on every interval where the data are monotone.
pub fn monotone_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 2 && ys.len() == n);
    let secants: Vec<f64> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let mut d = vec![0.0; n];
    d[0] = secants[0];
    d[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        let (s0, s1) = (secants[i - 1], secants[i]);
        d[i] = if s0 * s1 <= 0.0 {
            0.0
        } else {
            // Weighted harmonic mean (Fritsch–Butland).
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            (w0 + w1) / (w0 / s0 + w1 / s1)
        };
    }
    // Limit end slopes so the first and last pieces stay monotone.
    for (i, sec) in [(0usize, secants[0]), (n - 1, secants[n - 2])] {
        if d[i] * sec <= 0.0 {
            d[i] = 0.0;
        } else if d[i].abs() > 3.0 * sec.abs() {
            d[i] = 3.0 * sec;
        }
    }
    d
}
