//! Helpers for refinement studies.

/// Least-squares slope of `log y` against `log x`.
pub fn fit_order(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Values on successively finer grids settle: the increments shrink and the
/// last one is at most 25% of the finest value.
pub fn refinement_stable(values: &[f64]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let inc: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let shrinking = inc.windows(2).all(|w| w[1] <= w[0]);
    let last_ok = match (inc.last(), values.last()) {
        (Some(&d), Some(&v)) => d <= 0.25 * v.abs(),
        _ => true,
    };
    shrinking && last_ok
}

/// `true` when every successive ratio grows by at most 25%.
pub fn growth_bounded(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] <= 1.25 * w[0])
}
