//! Empirical convergence order from a log-log least-squares line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Slope of `ln(failure)` against `ln(N₀)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub points_used: usize,
    /// `N₀` values dropped because their failure was not positive.
    pub excluded: Vec<f64>,
}

/// Ordinary least-squares slope of `ln(failure)` vs `ln(N₀)`.
///
/// Nonpositive failures cannot be logged and are dropped with a warning; at
/// least three usable points with distinct `N₀` are required.
pub fn failure_scaling_fit(samples: &[(f64, f64)]) -> Result<FitResult> {
    let mut excluded = Vec::new();
    let mut points = Vec::with_capacity(samples.len());
    for &(n0, failure) in samples {
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::invalid(format!("coarse size must be positive, got {n0}")));
        }
        if failure > 0.0 && failure.is_finite() {
            points.push((n0.ln(), failure.ln()));
        } else {
            log::warn!("excluding N0 = {n0}: failure {failure} is not positive");
            excluded.push(n0);
        }
    }
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 points with positive failure, have {}",
            points.len()
        )));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("coarse sizes must be distinct"));
    }

    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();

    Ok(FitResult {
        slope,
        intercept,
        residual,
        points_used: points.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn power_law(c: f64, p: f64, ns: &[f64]) -> Vec<(f64, f64)> {
        ns.iter().map(|&n| (n, c * n.powf(p))).collect()
    }

    #[test]
    fn exact_power_laws() {
        let ns = [8.0, 16.0, 32.0, 64.0, 128.0];
        let fit = failure_scaling_fit(&power_law(3.7, -2.0, &ns)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
        let fit = failure_scaling_fit(&power_law(0.2, -1.0, &ns)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_points_are_excluded() {
        let mut data = power_law(1.0, -2.0, &[8.0, 16.0, 32.0]);
        data.push((64.0, 0.0));
        data.push((128.0, -1e-17));
        let fit = failure_scaling_fit(&data).unwrap();
        assert_eq!(fit.points_used, 3);
        assert_eq!(fit.excluded, vec![64.0, 128.0]);
        assert!((fit.slope + 2.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let data = [(8.0, 0.1), (16.0, 0.02), (32.0, 0.0)];
        assert!(matches!(failure_scaling_fit(&data), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn duplicate_sizes_rejected() {
        let data = [(8.0, 0.1), (8.0, 0.2), (32.0, 0.01)];
        assert!(failure_scaling_fit(&data).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(c in 1e-6f64..10.0, p in -4.0f64..0.5) {
            let data = power_law(c, p, &[4.0, 9.0, 20.0, 50.0]);
            let fit = failure_scaling_fit(&data).unwrap();
            prop_assert!((fit.slope - p).abs() < 1e-9);
            prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
        }
    }
}
