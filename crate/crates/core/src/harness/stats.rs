//! Bootstrap summaries for Monte-Carlo results.

use rand::Rng;

use crate::model::seeded_rng;

/// RNG stream reserved for resampling.
pub const BOOTSTRAP_STREAM: u64 = 2;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Linear-interpolated quantile of an ascending slice, `q` in `[0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Means of `resamples` bootstrap resamples, sorted ascending.
pub fn bootstrap_means(values: &[f64], resamples: usize, seed: u64) -> Vec<f64> {
    assert!(!values.is_empty(), "bootstrap needs at least one value");
    let mut rng = seeded_rng(seed, BOOTSTRAP_STREAM);
    let k = values.len();
    let mut out: Vec<f64> = (0..resamples)
        .map(|_| (0..k).map(|_| values[rng.random_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Bootstrap standard error of the mean.
pub fn bootstrap_se(values: &[f64], resamples: usize, seed: u64) -> f64 {
    variance(&bootstrap_means(values, resamples, seed)).sqrt()
}

/// Bootstrap distribution of `mean(a − b)` over paired trials.
pub fn paired_difference_means(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    bootstrap_means(&diff, resamples, seed)
}
