//! Stationarity-assuming estimators. Both take bare observation values and
//! have no access to the generator's bias realization.

use std::collections::VecDeque;

use crate::error::{ensure_finite, Error, Result};

/// Conjugate Gaussian posterior for a location parameter with known noise
/// variance.
///
/// Stored in natural-parameter form (precision and precision-weighted mean) so
/// that the running state is a plain sum and does not lose digits at large `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPosterior {
    precision: f64,
    weighted_mean: f64,
    count: usize,
}

impl GaussianPosterior {
    /// The prior `N(mean, variance)` with zero observations absorbed.
    pub fn prior(mean: f64, variance: f64) -> Result<Self> {
        ensure_finite(mean, "prior mean")?;
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::Config(format!(
                "prior variance must be finite and > 0, got {variance}"
            )));
        }
        let precision = 1.0 / variance;
        Ok(Self {
            precision,
            weighted_mean: precision * mean,
            count: 0,
        })
    }

    pub fn mean(&self) -> f64 {
        self.weighted_mean / self.precision
    }

    pub fn variance(&self) -> f64 {
        1.0 / self.precision
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Absorb one observation `y ~ N(theta, sigma^2)`.
    pub fn update(&self, y: f64, sigma: f64) -> Result<Self> {
        ensure_finite(y, "observation")?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be > 0, got {sigma}")));
        }
        let q = 1.0 / (sigma * sigma);
        Ok(Self {
            precision: self.precision + q,
            weighted_mean: self.weighted_mean + q * y,
            count: self.count + 1,
        })
    }

    /// Squared one-step-ahead residual `(y_next - mean)^2`, taken before
    /// `y_next` is absorbed.
    pub fn predictive_error(&self, y_next: f64) -> Result<f64> {
        ensure_finite(y_next, "observation")?;
        if self.count == 0 {
            return Err(Error::insufficient(1, 0));
        }
        Ok((y_next - self.mean()).powi(2))
    }
}

/// Free-function form of [`GaussianPosterior::update`].
pub fn conjugate_update(post: &GaussianPosterior, y: f64, sigma: f64) -> Result<GaussianPosterior> {
    post.update(y, sigma)
}

/// Free-function form of [`GaussianPosterior::predictive_error`].
pub fn one_step_predictive_error(post: &GaussianPosterior, y_next: f64) -> Result<f64> {
    post.predictive_error(y_next)
}

/// Sliding-window mean over the most recent `W` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimator {
    window: usize,
    buffer: VecDeque<f64>,
}

impl WindowEstimator {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(Self {
            window,
            buffer: VecDeque::with_capacity(window),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn buffer(&self) -> impl ExactSizeIterator<Item = &f64> {
        self.buffer.iter()
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn push(&mut self, y: f64) -> Result<()> {
        ensure_finite(y, "observation")?;
        if self.buffer.len() == self.window {
            self.buffer.pop_front();
        }
        self.buffer.push_back(y);
        Ok(())
    }

    /// Consuming form of [`push`](Self::push).
    pub fn update(mut self, y: f64) -> Result<Self> {
        self.push(y)?;
        Ok(self)
    }

    /// Mean of the buffered values. Uses the incremental mean recurrence, which
    /// returns a constant buffer's value exactly.
    pub fn estimate(&self) -> Result<f64> {
        if self.buffer.is_empty() {
            return Err(Error::NotReady);
        }
        let mut mean = 0.0;
        for (i, y) in self.buffer.iter().enumerate() {
            mean += (y - mean) / (i + 1) as f64;
        }
        Ok(mean)
    }
}

pub fn window_update(est: WindowEstimator, y: f64) -> Result<WindowEstimator> {
    est.update(y)
}

pub fn window_estimate(est: &WindowEstimator) -> Result<f64> {
    est.estimate()
}
