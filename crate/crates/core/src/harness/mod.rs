//! Scenario execution, replication, and file emission.

mod io;
mod presets;
mod svg;

pub use io::{
    ingest_csv, read_trace_csv, write_summary_csv, write_trace_csv, TRACE_COLUMNS,
};
pub use presets::{reproduce_figure, FigureData, FigureId, FigurePreset, PlotKind};
pub use svg::{Chart, Series, SeriesStyle};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{absolute_error, RunningMoments, TraceRow};
use crate::drift::{generate_stream, ScenarioConfig};
use crate::error::Result;
use crate::estimators::{GaussianPosterior, WindowEstimator};

/// Checkpoints for error-versus-data curves.
pub const CHECKPOINTS: [usize; 7] = [50, 100, 200, 500, 1000, 2000, 5000];

/// Run provenance stamped on every trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub tool_version: String,
    /// RFC 3339, UTC.
    pub created_at: String,
    pub seed: u64,
    /// Hex SHA-256 of [`ScenarioConfig::to_canonical_json`].
    pub config_hash: String,
    /// Set when the seed was supplied on the command line instead of the config file.
    #[serde(default)]
    pub seed_overridden: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub config: ScenarioConfig,
    pub rows: Vec<TraceRow>,
    pub metadata: TraceMetadata,
}

pub fn config_hash(config: &ScenarioConfig) -> String {
    Sha256::digest(config.to_canonical_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl TraceMetadata {
    pub fn for_config(config: &ScenarioConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            seed: config.seed,
            config_hash: config_hash(config),
            seed_overridden: false,
        }
    }
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("a trace has at least one row")
    }

    /// Row at 1-based step `t`.
    pub fn at(&self, t: usize) -> Option<&TraceRow> {
        t.checked_sub(1).and_then(|i| self.rows.get(i))
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Generate the stream and run the conjugate estimator (and the sliding
/// window, if configured) one observation at a time.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunTrace> {
    let records = generate_stream(config)?;
    let mut post = GaussianPosterior::prior(config.prior_mean, config.prior_var)?;
    let mut window = config.window.map(WindowEstimator::new).transpose()?;

    let mut rows = Vec::with_capacity(records.len());
    for rec in &records {
        let y = rec.y;
        let pred_err = match post.count() {
            0 => None,
            _ => Some(post.predictive_error(y)?),
        };
        post = post.update(y, config.sigma)?;
        let window_est = match window.as_mut() {
            Some(w) => {
                w.push(y)?;
                Some(w.estimate()?)
            }
            None => None,
        };
        rows.push(TraceRow {
            t: rec.t,
            y,
            b_true: rec.b_true,
            post_mean: post.mean(),
            post_var: post.variance(),
            abs_error: absolute_error(post.mean(), config.theta_star),
            pred_err,
            window_est,
        });
    }

    Ok(RunTrace {
        config: config.clone(),
        rows,
        metadata: TraceMetadata::for_config(config),
    })
}

/// Config for replicate `i` of a base config: seed advanced by `i`.
pub fn seed_offset(config: &ScenarioConfig, i: u64) -> ScenarioConfig {
    config.clone().with_seed(config.seed.wrapping_add(i))
}

/// Independent runs at seeds `seed, seed + 1, ...`, returned in seed order.
pub fn run_seeds(config: &ScenarioConfig, n_seeds: usize) -> Result<Vec<RunTrace>> {
    config.validate()?;
    (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| run_scenario(&seed_offset(config, i)))
        .collect()
}

/// Checkpoints from [`CHECKPOINTS`] that fit in `n`, with `n` itself appended.
pub fn checkpoints_for(n: usize) -> Vec<usize> {
    let mut cps: Vec<usize> = CHECKPOINTS.iter().copied().filter(|&c| c <= n).collect();
    if cps.last() != Some(&n) {
        cps.push(n);
    }
    cps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Across-seed sample sd; absent with a single contributing seed.
    pub sd: Option<f64>,
    pub count: usize,
}

impl MeanSd {
    fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut acc = RunningMoments::default();
        values.into_iter().for_each(|v| acc.push(v));
        Some(Self {
            mean: acc.mean()?,
            sd: acc.sample_variance().map(f64::sqrt),
            count: acc.count(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub checkpoint: usize,
    pub abs_error: MeanSd,
    pub post_var: MeanSd,
    pub pred_err: Option<MeanSd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub config: ScenarioConfig,
    pub n_seeds: usize,
    pub rows: Vec<SummaryRow>,
}

impl ReplicateSummary {
    pub fn at(&self, checkpoint: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.checkpoint == checkpoint)
    }

    pub fn from_traces(config: &ScenarioConfig, traces: &[RunTrace]) -> Self {
        let rows = checkpoints_for(config.n)
            .into_iter()
            .map(|cp| {
                let at = |f: fn(&TraceRow) -> Option<f64>| {
                    traces.iter().filter_map(move |tr| tr.at(cp).and_then(f))
                };
                SummaryRow {
                    checkpoint: cp,
                    abs_error: MeanSd::from_values(at(|r| Some(r.abs_error)))
                        .expect("at least one seed"),
                    post_var: MeanSd::from_values(at(|r| Some(r.post_var)))
                        .expect("at least one seed"),
                    pred_err: MeanSd::from_values(at(|r| r.pred_err)),
                }
            })
            .collect();
        Self {
            config: config.clone(),
            n_seeds: traces.len(),
            rows,
        }
    }
}

/// Per-checkpoint across-seed summary of `abs_error`, `post_var`, and `pred_err`.
pub fn replicate(config: &ScenarioConfig, n_seeds: usize) -> Result<ReplicateSummary> {
    if n_seeds == 0 {
        return Err(crate::Error::Config("n_seeds must be at least 1".into()));
    }
    let traces = run_seeds(config, n_seeds)?;
    Ok(ReplicateSummary::from_traces(config, &traces))
}
