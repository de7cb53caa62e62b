//! Small summary statistics used by the ensemble engine and the tests.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub stderr: f64,
}

/// Mean, sample standard deviation and standard error, summed in index order.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary { count: 0, mean: f64::NAN, std: f64::NAN, stderr: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary { count: n, mean, std, stderr: std / (n as f64).sqrt() }
}

/// Circular mean direction in `[0, 2π)` and mean resultant length in `[0, 1]`.
pub fn circular_summary(angles: &[f64]) -> (f64, f64) {
    if angles.is_empty() {
        return (0.0, 0.0);
    }
    let (s, c) = angles
        .iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let n = angles.len() as f64;
    let r = ((s / n).powi(2) + (c / n).powi(2)).sqrt().min(1.0);
    (s.atan2(c).rem_euclid(std::f64::consts::TAU), r)
}

/// Kolmogorov–Smirnov distance between a sample and `Uniform[lo, hi)`.
pub fn ks_distance_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            let above = (i + 1) as f64 / n - cdf;
            let below = cdf - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}
