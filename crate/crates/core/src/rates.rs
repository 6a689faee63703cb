//! Log-log least-squares fits of convergence metrics against the iteration index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible window start; earlier iterations are treated as transient.
pub const MIN_WINDOW_START: usize = 10;

/// Fewest usable samples a fit accepts.
pub const MIN_POINTS: usize = 20;

/// Values below this are at the numerical floor and excluded from fits.
pub const METRIC_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub window: (usize, usize),
    /// Slope of `log(metric)` against `log(k)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub metric: String,
    pub points: usize,
}

/// Fit `log(value) ≈ intercept + slope·log(k)` over `k ∈ [k_lo, k_hi]`.
pub fn fit_rate(samples: &[(usize, f64)], window: (usize, usize), metric: &str) -> Result<RateReport> {
    let (k_lo, k_hi) = window;
    if k_lo < MIN_WINDOW_START {
        return Err(Error::RateFit(format!("window must start at k >= {MIN_WINDOW_START}, got {k_lo}")));
    }
    if k_hi < k_lo {
        return Err(Error::RateFit(format!("empty window [{k_lo}, {k_hi}]")));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(k, y)| (k_lo..=k_hi).contains(k) && y.is_finite() && *y >= METRIC_FLOOR)
        .map(|&(k, y)| ((k as f64).ln(), y.ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::RateFit(format!(
            "only {} usable points of {metric} in [{k_lo}, {k_hi}]; at least {MIN_POINTS} are needed, \
             so use a larger budget or a wider window",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::RateFit("all usable points share one k".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(RateReport {
        window,
        slope,
        intercept,
        residual: (sse / n).sqrt(),
        metric: metric.to_string(),
        points: pts.len(),
    })
}

/// First `k` at which the metric drops below [`METRIC_FLOOR`].
pub fn floor_reached(samples: &[(usize, f64)]) -> Option<usize> {
    samples.iter().find(|(_, y)| *y < METRIC_FLOOR).map(|(k, _)| *k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(p: f64) -> Vec<(usize, f64)> {
        (1..=2000).map(|k| (k, 3.0 * (k as f64).powf(-p))).collect()
    }

    #[test]
    fn exact_power_laws() {
        for p in [1.0, 2.0, 0.5] {
            let r = fit_rate(&power_law(p), (100, 2000), "m").unwrap();
            assert!((r.slope + p).abs() <= 1e-6, "{p}: {}", r.slope);
            assert!((r.intercept - 3f64.ln()).abs() <= 1e-6);
            assert!(r.residual < 1e-9);
            assert_eq!(r.points, 1901);
        }
    }

    #[test]
    fn window_rules() {
        let s = power_law(1.0);
        assert!(fit_rate(&s, (5, 100), "m").is_err());
        assert!(fit_rate(&s, (100, 50), "m").is_err());
        assert!(fit_rate(&s, (100, 110), "m").is_err());
        assert!(fit_rate(&s, (100, 119), "m").is_ok());
    }

    #[test]
    fn floor_values_are_excluded() {
        let mut s = power_law(2.0);
        for p in s.iter_mut().skip(1000) {
            p.1 = 0.0;
        }
        let r = fit_rate(&s, (100, 2000), "m").unwrap();
        assert_eq!(r.points, 901);
        assert!((r.slope + 2.0).abs() < 1e-6);
        assert_eq!(floor_reached(&s), Some(1001));
        assert_eq!(floor_reached(&power_law(1.0)), None);
    }
}
