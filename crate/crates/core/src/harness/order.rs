use crate::error::{Error, Result};
use crate::integrators::Scheme;

use super::Aggregate;

/// Least-squares slope of `ln(error)` against `ln(dt)`.
pub fn estimate_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(dt, err)) = points.iter().find(|(dt, e)| !(*dt > 0.0 && *e > 0.0)) {
        return Err(Error::Estimation(format!(
            "nonpositive value at dt = {dt}, error = {err}"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Estimation("all step sizes coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Order for one `(alpha, scheme)` series over its `window` finest steps.
pub fn order_for(
    aggregates: &[Aggregate],
    alpha: f64,
    scheme: &Scheme,
    window: usize,
) -> Result<f64> {
    let mut series: Vec<(f64, f64)> = aggregates
        .iter()
        .filter(|a| a.alpha == alpha && a.scheme == *scheme)
        .map(|a| (a.step.dt(), a.mean_error))
        .collect();
    series.sort_by(|a, b| a.0.total_cmp(&b.0));
    if series.len() < window {
        return Err(Error::Estimation(format!(
            "alpha = {alpha}, {scheme}: {} steps available, window is {window}",
            series.len()
        )));
    }
    series.truncate(window);
    estimate_order(&series)
}
