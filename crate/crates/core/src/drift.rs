//! Seeded generation of observation streams `y_t = theta* + eps_t + b_t`.
//!
//! Randomness comes from ChaCha20 keyed by [`ScenarioConfig::seed`] (expanded
//! with `SeedableRng::seed_from_u64`). Two ChaCha stream ids partition the key:
//!
//! | stream | use                                   |
//! |--------|---------------------------------------|
//! | 0      | observation noise `eps_t`             |
//! | 1      | random-walk innovations `eta_k`       |
//!
//! Gaussian variates are drawn with `rand_distr::StandardNormal` (ziggurat) and
//! scaled by the relevant standard deviation. Because noise and drift never share
//! a stream, switching the drift kind leaves the noise realization untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ChaCha stream id carrying observation noise.
pub const NOISE_STREAM: u64 = 0;
/// ChaCha stream id carrying random-walk innovations.
pub const DRIFT_STREAM: u64 = 1;

/// Build the generator for one sub-stream of a seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    None,
    Linear,
    RandomWalk,
}

/// The bias process `b_t`. `alpha` is read only for [`DriftKind::Linear`],
/// `sigma_rw` only for [`DriftKind::RandomWalk`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub kind: DriftKind,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub sigma_rw: f64,
}

impl DriftSpec {
    pub const fn none() -> Self {
        Self {
            kind: DriftKind::None,
            alpha: 0.0,
            sigma_rw: 0.0,
        }
    }

    pub const fn linear(alpha: f64) -> Self {
        Self {
            kind: DriftKind::Linear,
            alpha,
            sigma_rw: 0.0,
        }
    }

    pub const fn random_walk(sigma_rw: f64) -> Self {
        Self {
            kind: DriftKind::RandomWalk,
            alpha: 0.0,
            sigma_rw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DriftKind::None => Ok(()),
            DriftKind::Linear if !self.alpha.is_finite() => Err(Error::Config(format!(
                "linear drift alpha must be finite, got {}",
                self.alpha
            ))),
            DriftKind::Linear => Ok(()),
            DriftKind::RandomWalk if !(self.sigma_rw.is_finite() && self.sigma_rw > 0.0) => {
                Err(Error::Config(format!(
                    "random-walk sigma_rw must be finite and > 0, got {}",
                    self.sigma_rw
                )))
            }
            DriftKind::RandomWalk => Ok(()),
        }
    }
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// A complete experiment description. The JSON form mirrors these fields
/// exactly; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub theta_star: f64,
    pub sigma: f64,
    pub n: usize,
    pub prior_mean: f64,
    pub prior_var: f64,
    pub drift: DriftSpec,
    pub seed: u64,
    #[serde(default)]
    pub window: Option<usize>,
}

impl Default for ScenarioConfig {
    /// `theta* = 0`, `sigma = 1`, `n = 5000`, prior `N(0, 10^2)`, no drift.
    fn default() -> Self {
        Self {
            theta_star: 0.0,
            sigma: 1.0,
            n: 5000,
            prior_mean: 0.0,
            prior_var: 100.0,
            drift: DriftSpec::none(),
            seed: 0,
            window: None,
        }
    }
}

impl ScenarioConfig {
    pub fn with_drift(mut self, drift: DriftSpec) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = Some(window);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !self.theta_star.is_finite() {
            return Err(Error::Config("theta_star must be finite".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !self.prior_mean.is_finite() {
            return Err(Error::Config("prior_mean must be finite".into()));
        }
        if !(self.prior_var.is_finite() && self.prior_var > 0.0) {
            return Err(Error::Config(format!(
                "prior_var must be > 0, got {}",
                self.prior_var
            )));
        }
        if let Some(w) = self.window {
            if w == 0 || w > self.n {
                return Err(Error::Config(format!(
                    "window must satisfy 1 <= W <= n ({}), got {w}",
                    self.n
                )));
            }
        }
        self.drift.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Compact JSON with fields in declaration order; the input to the config hash.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("ScenarioConfig serializes infallibly")
    }
}

/// One generated observation. `b_true` is generator-private: it exists for
/// oracle checks and trace output and is never passed to an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRecord {
    /// 1-based step index.
    pub t: usize,
    pub y: f64,
    pub b_true: f64,
}

/// Realize `b_1..b_n`. Random-walk innovations are drawn from `rng`, which
/// callers position at [`DRIFT_STREAM`] of the scenario seed.
pub fn realize_bias<R: Rng + ?Sized>(drift: &DriftSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    drift.validate()?;
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let bias = match drift.kind {
        DriftKind::None => vec![0.0; n],
        DriftKind::Linear => (1..=n).map(|t| drift.alpha * t as f64).collect(),
        DriftKind::RandomWalk => {
            // b_0 = 0, so b_1 = eta_1.
            let mut level = 0.0;
            (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    level += drift.sigma_rw * z;
                    level
                })
                .collect()
        }
    };
    Ok(bias)
}

pub fn generate_stream(config: &ScenarioConfig) -> Result<Vec<ObservationRecord>> {
    config.validate()?;
    let mut noise_rng = substream(config.seed, NOISE_STREAM);
    let mut drift_rng = substream(config.seed, DRIFT_STREAM);
    let bias = realize_bias(&config.drift, config.n, &mut drift_rng)?;
    Ok(bias
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let z: f64 = noise_rng.sample(StandardNormal);
            ObservationRecord {
                t: i + 1,
                y: config.theta_star + config.sigma * z + b,
                b_true: b,
            }
        })
        .collect())
}
