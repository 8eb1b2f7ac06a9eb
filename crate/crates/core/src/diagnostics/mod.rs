//! Per-run diagnostic quantities.

mod kendall;

pub use kendall::{
    block_means, blocked_trend, kendall_tau_test, kendall_tau_test_with, Alternative, TrendResult,
    EXACT_MAX_N,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One step of a run: the observation, the posterior after absorbing it, and
/// the predictive error made before absorbing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub y: f64,
    pub b_true: f64,
    pub post_mean: f64,
    pub post_var: f64,
    pub abs_error: f64,
    /// Absent at `t = 1`.
    pub pred_err: Option<f64>,
    /// Present only when the run has a sliding window.
    pub window_est: Option<f64>,
}

pub fn absolute_error(post_mean: f64, theta_star: f64) -> f64 {
    (post_mean - theta_star).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub mean: f64,
    /// Sample variance with `n - 1` denominator.
    pub variance: f64,
    pub n: usize,
}

/// Statistics of `r_t = y_t - theta_hat_final`.
pub fn residual_stats(y: &[f64], theta_hat_final: f64) -> Result<ResidualStats> {
    if y.len() < 2 {
        return Err(Error::insufficient(2, y.len()));
    }
    let mut acc = RunningMoments::default();
    for v in y {
        acc.push(v - theta_hat_final);
    }
    Ok(ResidualStats {
        mean: acc.mean,
        variance: acc.sample_variance().unwrap_or(0.0),
        n: acc.count,
    })
}

/// `theta* + mean(b_t)`: where a consistent stationary estimator settles under
/// the realized bias path.
pub fn prop1_limit(b_true: &[f64], theta_star: f64) -> Result<f64> {
    if b_true.is_empty() {
        return Err(Error::insufficient(1, 0));
    }
    Ok(theta_star + b_true.iter().sum::<f64>() / b_true.len() as f64)
}

/// Tolerance for `|theta_hat_n - prop1_limit|`: a `5 sigma / sqrt(n)` noise
/// band plus the pull of the prior, `(|mu_0| + |limit|) sigma^2 / (tau_0^2 n)`.
pub fn prop1_tolerance(limit: f64, sigma: f64, n: usize, prior_mean: f64, prior_var: f64) -> f64 {
    let nf = n as f64;
    5.0 * sigma / nf.sqrt() + (prior_mean.abs() + limit.abs()) * sigma * sigma / (prior_var * nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeEstimate {
    pub n: usize,
    pub running_mean: f64,
    /// `sd / sqrt(n)`; absent for `n < 2`.
    pub standard_error: Option<f64>,
}

/// Prefix means with their standard errors.
pub fn cumulative_estimates(y: &[f64]) -> Vec<CumulativeEstimate> {
    let mut acc = RunningMoments::default();
    y.iter()
        .map(|v| {
            acc.push(*v);
            CumulativeEstimate {
                n: acc.count,
                running_mean: acc.mean,
                standard_error: acc
                    .sample_variance()
                    .map(|var| var.sqrt() / (acc.count as f64).sqrt()),
            }
        })
        .collect()
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RunningMoments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn count(&self) -> usize {
        self.count
    }

    pub(crate) fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub(crate) fn sample_variance(&self) -> Option<f64> {
        (self.count > 1).then(|| (self.m2 / (self.count - 1) as f64).max(0.0))
    }
}
