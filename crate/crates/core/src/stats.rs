//! Summary statistics for the empirical inequality harnesses.

use serde::{Deserialize, Serialize};

/// Quantile levels reported by every harness.
pub const QUANTILES: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsRecord {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Pairs (level, value) at the levels in [`QUANTILES`].
    pub quantiles: Vec<(f64, f64)>,
}

impl StatsRecord {
    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        let count = samples.len();
        if count == 0 {
            return Self { count: 0, min: 0.0, max: 0.0, mean: 0.0, quantiles: Vec::new() };
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min = samples[0];
        let max = samples[count - 1];
        let mean = samples.iter().sum::<f64>() / count as f64;
        let quantiles = QUANTILES
            .iter()
            .map(|&q| {
                let pos = q * (count - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                let frac = pos - lo as f64;
                (q, samples[lo] * (1.0 - frac) + samples[hi] * frac)
            })
            .collect();
        Self { count, min, max, mean, quantiles }
    }
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
        syy += (yi - my) * (yi - my);
    }
    sxy / (sxx * syy).sqrt()
}
