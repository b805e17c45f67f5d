//! Coverage, outage and rate-with-outage statistics over raw grid samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target rates in bit/s, highest first: 1 Gbps, 500 Mbps, 50 Mbps.
pub const DEFAULT_TARGETS: [f64; 3] = [1e9, 500e6, 50e6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub target_rates: Vec<f64>,
    pub coverage_percent: Vec<f64>,
    pub mean_rate: f64,
    pub std_dev: f64,
    pub realization_count: usize,
}

/// Percentage of samples reaching `target`.
pub fn coverage_percent(samples: &[f64], target: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let hits = samples.iter().filter(|&&r| r >= target).count();
    Ok(100.0 * hits as f64 / samples.len() as f64)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Coverage over samples grouped by realization. Coverage pools every
/// sample; mean and standard deviation are taken over the per-realization
/// means. With a single realization the spread is over its samples instead.
pub fn coverage(groups: &[Vec<f64>], targets: &[f64]) -> Result<CoverageReport> {
    let groups: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    if groups.is_empty() {
        return Err(Error::EmptySample);
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let (mean_rate, std_dev) = if means.len() == 1 {
        (mean(&pooled), population_std(&pooled))
    } else {
        (mean(&means), population_std(&means))
    };
    Ok(CoverageReport {
        target_rates: targets.to_vec(),
        coverage_percent: targets
            .iter()
            .map(|&t| coverage_percent(&pooled, t))
            .collect::<Result<_>>()?,
        mean_rate,
        std_dev,
        realization_count: groups.len(),
    })
}

/// Empirical `P[rate < threshold]`.
pub fn outage_probability(samples: &[f64], threshold: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let below = samples.iter().filter(|&&r| r < threshold).count();
    Ok(below as f64 / samples.len() as f64)
}

/// Largest sample value whose empirical outage does not exceed `epsilon`.
pub fn rate_with_outage(samples: &[f64], epsilon: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Config(format!("outage level {epsilon} outside [0, 1]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // The outage of sorted[i] is (number of strictly smaller values) / n,
    // which only grows with i, so scan upward and keep the last admissible.
    let mut best = sorted[0];
    let mut below = 0;
    for (i, &z) in sorted.iter().enumerate() {
        if i > 0 && sorted[i - 1] < z {
            below = i;
        }
        if below as f64 / n <= epsilon {
            best = z;
        } else {
            break;
        }
    }
    Ok(best)
}

/// Throughput delivered when transmitting at the rate with outage.
pub fn throughput_with_outage(samples: &[f64], epsilon: f64) -> Result<f64> {
    Ok((1.0 - epsilon) * rate_with_outage(samples, epsilon)?)
}
