//! Summary statistics for paired comparisons.

use rand::Rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Percentile bootstrap lower bound of the mean of `diffs` at the given
/// one-sided confidence level.
pub fn bootstrap_lower_bound<R: Rng + ?Sized>(diffs: &[f64], resamples: usize, confidence: f64, rng: &mut R) -> f64 {
    if diffs.is_empty() || resamples == 0 {
        return f64::NAN;
    }
    let n = diffs.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| diffs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let idx = (((1.0 - confidence) * resamples as f64).floor() as usize).min(resamples - 1);
    means[idx]
}
