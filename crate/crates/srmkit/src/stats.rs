//! Scalar statistics used throughout the toolkit: correlation coefficients
//! and percentile-bootstrap confidence intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Pearson correlation coefficient of two equal-length samples.
///
/// Requires at least two observations and nonzero variance on both sides.
/// The result is clamped to `[-1, 1]` to absorb rounding at the extremes.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Fractional ranks (1-based) with ties assigned the average of the ranks
/// they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 averaged over the tie group
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of the fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::EmptyInput);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Percentile-bootstrap confidence interval for the mean of a sample.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BootstrapCi {
    /// Mean of the original sample.
    pub mean: f64,
    /// Lower percentile bound of the resampled means.
    pub lo: f64,
    /// Upper percentile bound of the resampled means.
    pub hi: f64,
    /// Confidence level, e.g. 0.95.
    pub level: f64,
    /// Number of bootstrap resamples drawn.
    pub resamples: usize,
    /// True when the interval carries no information: a single observation
    /// or a sample so concentrated that both bounds coincide.
    pub degenerate: bool,
}

/// Linear-interpolation quantile of a sorted slice, `q` in `[0, 1]`.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile bootstrap for the sample mean.
///
/// Draws `resamples` with-replacement resamples of the input, takes each
/// resample's mean, and reports the `(1-level)/2` and `(1+level)/2`
/// quantiles of that distribution. Deterministic for a fixed `seed`.
pub fn bootstrap_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> Result<BootstrapCi> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(Error::BadCiLevel(level));
    }
    if resamples == 0 {
        return Err(Error::InvalidSpec("bootstrap needs at least 1 resample".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok(BootstrapCi {
            mean,
            lo: mean,
            hi: mean,
            level,
            resamples,
            degenerate: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.gen_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lo = sorted_quantile(&means, alpha);
    let hi = sorted_quantile(&means, 1.0 - alpha);
    Ok(BootstrapCi {
        mean,
        lo,
        hi,
        level,
        resamples,
        degenerate: lo == hi,
    })
}
