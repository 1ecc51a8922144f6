//! Streaming sample statistics: single-pass central moments up to order four
//! (for skewness, kurtosis and the Jarque-Bera statistic), pairwise
//! covariances, and order statistics helpers.
//!
//! Accumulators merge associatively so partial states from parallel workers
//! can be combined, but the harness folds replicates in index order so that
//! results never depend on the thread count.

use serde::Serialize;
use thiserror::Error;

/// chi-squared(2) quantile at 0.999: the Jarque-Bera pass threshold.
pub const JB_CRITICAL_999: f64 = 13.82;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("need at least {min} samples, got {got}")]
    InsufficientSamples { got: u64, min: u64 },
    #[error("sample has zero variance; moments of the standardized sample are undefined")]
    ZeroVariance,
}

/// Single-pass accumulator for mean and central moments M2..M4.
#[derive(Debug, Clone, Copy, Default)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    /// Combines two partial states (Pebay's formulas).
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let d = other.mean - self.mean;
        let m2 = self.m2 + other.m2 + d * d * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d.powi(3) * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d.powi(4) * na * nb * (na * na - na * nb + nb * nb) / n.powi(3)
            + 6.0 * d * d * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        MomentAccumulator {
            count: self.count + other.count,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count as f64 - 1.0)
        }
    }

    /// Standard error of the sample mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Sample skewness g1 = m3 / m2^{3/2} (biased moment form).
    pub fn skewness(&self) -> f64 {
        let n = self.count as f64;
        let m2 = self.m2 / n;
        let m3 = self.m3 / n;
        m3 / m2.powf(1.5)
    }

    /// Sample excess kurtosis g2 = m4 / m2^2 - 3.
    pub fn excess_kurtosis(&self) -> f64 {
        let n = self.count as f64;
        let m2 = self.m2 / n;
        let m4 = self.m4 / n;
        m4 / (m2 * m2) - 3.0
    }

    /// JB = n (g1^2/6 + g2^2/24).
    pub fn jarque_bera(&self) -> f64 {
        let g1 = self.skewness();
        let g2 = self.excess_kurtosis();
        self.count as f64 * (g1 * g1 / 6.0 + g2 * g2 / 24.0)
    }
}

/// Streaming covariance of scalar pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct CovarianceAccumulator {
    count: u64,
    mean_x: f64,
    mean_y: f64,
    comoment: f64,
}

impl CovarianceAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64, y: f64) {
        self.count += 1;
        let n = self.count as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        self.mean_y += (y - self.mean_y) / n;
        self.comoment += dx * (y - self.mean_y);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        CovarianceAccumulator {
            count: self.count + other.count,
            mean_x: self.mean_x + dx * nb / n,
            mean_y: self.mean_y + dy * nb / n,
            comoment: self.comoment + other.comoment + dx * dy * na * nb / n,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.comoment / (self.count as f64 - 1.0)
        }
    }
}

/// Moment summary of a scalar sample, as reported by the normality check.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryStats {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub jarque_bera: f64,
}

/// Standardizes the sample by the given theoretical mean and variance, then
/// summarizes its moments. At least 100 samples with nonzero spread are
/// required.
pub fn standardized_summary(
    samples: &[f64],
    theory_mean: f64,
    theory_var: f64,
) -> Result<SummaryStats, StatsError> {
    if samples.len() < 100 {
        return Err(StatsError::InsufficientSamples {
            got: samples.len() as u64,
            min: 100,
        });
    }
    let sd = theory_var.sqrt();
    let mut acc = MomentAccumulator::new();
    for &x in samples {
        acc.update((x - theory_mean) / sd);
    }
    if acc.variance() == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(SummaryStats {
        count: acc.count(),
        mean: acc.mean(),
        variance: acc.variance(),
        skewness: acc.skewness(),
        excess_kurtosis: acc.excess_kurtosis(),
        jarque_bera: acc.jarque_bera(),
    })
}

/// Median by sorting a copy; even-length samples average the middle pair.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    fn naive_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let mut c = [0.0; 3];
        for &x in xs {
            let d = x - mean;
            c[0] += d * d;
            c[1] += d * d * d;
            c[2] += d * d * d * d;
        }
        (mean, c[0], c[1], c[2])
    }

    #[test]
    fn streaming_matches_two_pass() {
        let mut rng = replicate_rng(11);
        let xs: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 10.0 - 3.0).collect();
        let mut acc = MomentAccumulator::new();
        for &x in &xs {
            acc.update(x);
        }
        let (mean, m2, m3, m4) = naive_moments(&xs);
        assert_relative_eq!(acc.mean(), mean, max_relative = 1e-12);
        assert_relative_eq!(acc.m2, m2, max_relative = 1e-10);
        assert_relative_eq!(acc.m3, m3, max_relative = 1e-8, epsilon = 1e-8);
        assert_relative_eq!(acc.m4, m4, max_relative = 1e-10);
    }

    #[test]
    fn merge_equals_single_stream() {
        let mut rng = replicate_rng(13);
        let xs: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
        let mut whole = MomentAccumulator::new();
        let mut left = MomentAccumulator::new();
        let mut right = MomentAccumulator::new();
        for (i, &x) in xs.iter().enumerate() {
            whole.update(x);
            if i < 150 {
                left.update(x);
            } else {
                right.update(x);
            }
        }
        let merged = left.merge(&right);
        assert_eq!(merged.count(), whole.count());
        assert_relative_eq!(merged.mean(), whole.mean(), max_relative = 1e-12);
        assert_relative_eq!(merged.m2, whole.m2, max_relative = 1e-10);
        assert_relative_eq!(merged.m4, whole.m4, max_relative = 1e-10);
        assert_relative_eq!(
            merged.jarque_bera(),
            whole.jarque_bera(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn covariance_matches_two_pass() {
        let mut rng = replicate_rng(17);
        let pairs: Vec<(f64, f64)> = (0..300)
            .map(|_| {
                let x: f64 = rng.random();
                (x, 2.0 * x + rng.random::<f64>())
            })
            .collect();
        let mut acc = CovarianceAccumulator::new();
        for &(x, y) in &pairs {
            acc.update(x, y);
        }
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let cov: f64 = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
        assert_relative_eq!(acc.covariance(), cov, max_relative = 1e-10);

        let mut left = CovarianceAccumulator::new();
        let mut right = CovarianceAccumulator::new();
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if i % 2 == 0 {
                left.update(x, y);
            } else {
                right.update(x, y);
            }
        }
        assert_relative_eq!(left.merge(&right).covariance(), cov, max_relative = 1e-10);
    }

    #[test]
    fn jb_accepts_normal_and_rejects_exponential() {
        let mut rng = replicate_rng(19);
        let normal: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let stats = standardized_summary(&normal, 0.0, 1.0).unwrap();
        assert!(
            stats.jarque_bera < JB_CRITICAL_999,
            "JB = {}",
            stats.jarque_bera
        );

        let expo: Vec<f64> = (0..2000).map(|_| Exp1.sample(&mut rng)).collect();
        let stats = standardized_summary(&expo, 1.0, 1.0).unwrap();
        assert!(
            stats.jarque_bera > JB_CRITICAL_999,
            "JB = {}",
            stats.jarque_bera
        );
    }

    #[test]
    fn degenerate_samples_error() {
        let flat = vec![3.0; 200];
        assert_eq!(
            standardized_summary(&flat, 0.0, 1.0).unwrap_err(),
            StatsError::ZeroVariance
        );
        let short = vec![1.0, 2.0];
        assert!(matches!(
            standardized_summary(&short, 0.0, 1.0),
            Err(StatsError::InsufficientSamples { got: 2, min: 100 })
        ));
    }

    #[test]
    fn median_of_odd_and_even_samples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[5.0]), 5.0);
    }
}
