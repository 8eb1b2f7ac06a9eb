//! Figure presets. Every preset uses `theta* = 0`, `sigma = 1`, `n = 5000` and
//! the prior `N(0, 10^2)`; drifting presets use `alpha = 0.002` (linear) or
//! `sigma_rw = 0.01` (random walk), and the forgetting baseline uses `W = 200`.
//!
//! The `E2-*` presets rerun the linear-drift mechanics under the photometric
//! reading of the model: `y` is a repeated magnitude measurement and `b` a
//! slowly drifting zeropoint.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::audit::{rolling_mean, AuditPolicy};
use crate::drift::{DriftSpec, ScenarioConfig};
use crate::error::{Error, Result};

use super::io::{csv_writer, fmt_cell};
use super::svg::{Chart, Series, SeriesStyle};
use super::{replicate, run_scenario};

pub const PRESET_SEED: u64 = 42;
/// Seeds averaged in error-curve presets.
pub const CURVE_SEEDS: usize = 100;
pub const LINEAR_ALPHA: f64 = 0.002;
pub const RANDOM_WALK_SIGMA: f64 = 0.01;
pub const WINDOW: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FigureId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    E2_1,
    E2_2,
    E2_3,
    E2_4,
}

impl FigureId {
    pub const ALL: [FigureId; 11] = [
        FigureId::F1,
        FigureId::F2,
        FigureId::F3,
        FigureId::F4,
        FigureId::F5,
        FigureId::F6,
        FigureId::F7,
        FigureId::E2_1,
        FigureId::E2_2,
        FigureId::E2_3,
        FigureId::E2_4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::F1 => "F1",
            FigureId::F2 => "F2",
            FigureId::F3 => "F3",
            FigureId::F4 => "F4",
            FigureId::F5 => "F5",
            FigureId::F6 => "F6",
            FigureId::F7 => "F7",
            FigureId::E2_1 => "E2-1",
            FigureId::E2_2 => "E2-2",
            FigureId::E2_3 => "E2-3",
            FigureId::E2_4 => "E2-4",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    /// Accepts `F3`, `f3`, `E2-1`, `E2_1`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == norm)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Series,
    ErrorCurve,
    Scatter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: FigureId,
    pub config: ScenarioConfig,
    pub plot: PlotKind,
    /// Seeds aggregated (error curves) or 1.
    pub n_seeds: usize,
    pub title: &'static str,
}

impl FigurePreset {
    pub fn get(id: FigureId) -> Self {
        let base = ScenarioConfig::default().with_seed(PRESET_SEED);
        let linear = base.clone().with_drift(DriftSpec::linear(LINEAR_ALPHA));
        let (config, plot, title) = match id {
            FigureId::F1 => (linear, PlotKind::Series, "Observed data with unobservable drift"),
            FigureId::F2 => (linear, PlotKind::Series, "Posterior mean under unobservable drift"),
            FigureId::F3 => (linear, PlotKind::ErrorCurve, "Absolute inference error versus data volume"),
            FigureId::F4 => (base, PlotKind::ErrorCurve, "No-drift control"),
            FigureId::F5 => (
                base.with_drift(DriftSpec::random_walk(RANDOM_WALK_SIGMA)),
                PlotKind::ErrorCurve,
                "Inference error under random-walk drift",
            ),
            FigureId::F6 => (
                linear.with_window(WINDOW),
                PlotKind::Series,
                "Sliding-window estimation under drift",
            ),
            FigureId::F7 => (
                linear,
                PlotKind::Scatter,
                "Predictive error against posterior variance",
            ),
            FigureId::E2_1 => (linear, PlotKind::Series, "Photometric measurements under zeropoint drift"),
            FigureId::E2_2 => (linear, PlotKind::Series, "Posterior mean under zeropoint drift"),
            FigureId::E2_3 => (linear, PlotKind::ErrorCurve, "Inference error versus number of epochs"),
            FigureId::E2_4 => (
                linear,
                PlotKind::Scatter,
                "Confidence versus predictive consistency",
            ),
        };
        let n_seeds = if plot == PlotKind::ErrorCurve { CURVE_SEEDS } else { 1 };
        Self {
            id,
            config,
            plot,
            n_seeds,
            title,
        }
    }

    /// Compute the figure's canonical table and chart.
    pub fn render(&self) -> Result<FigureData> {
        use FigureId::*;
        let cfg = &self.config;
        let data = match self.id {
            F1 | E2_1 => {
                let tr = run_scenario(cfg)?;
                let rows = tr
                    .rows
                    .iter()
                    .map(|r| vec![Some(r.t as f64), Some(r.y), Some(r.b_true)])
                    .collect();
                let y_label = if self.id == F1 { "y" } else { "measured magnitude offset" };
                FigureData::table(&["t", "y", "b_true"], rows).chart(
                    self.title,
                    "t",
                    y_label,
                    false,
                    &[(1, "y", SeriesStyle::Points), (2, "b_true", SeriesStyle::Line)],
                )
            }
            F2 | E2_2 => {
                let tr = run_scenario(cfg)?;
                let rows = tr
                    .rows
                    .iter()
                    .map(|r| vec![Some(r.t as f64), Some(r.post_mean), Some(r.post_var)])
                    .collect();
                let truth = vec![(1.0, cfg.theta_star), (cfg.n as f64, cfg.theta_star)];
                let mut fig = FigureData::table(&["t", "post_mean", "post_var"], rows).chart(
                    self.title,
                    "t",
                    "posterior mean",
                    false,
                    &[(1, "post_mean", SeriesStyle::Line)],
                );
                fig.chart.series.push(Series::new("theta*", truth, SeriesStyle::Dashed));
                fig
            }
            F3 | F4 | F5 | E2_3 => {
                let summary = replicate(cfg, self.n_seeds)?;
                let rows = summary
                    .rows
                    .iter()
                    .map(|r| vec![Some(r.checkpoint as f64), Some(r.abs_error.mean), r.abs_error.sd])
                    .collect();
                FigureData::table(&["n", "abs_error_mean", "abs_error_sd"], rows).chart(
                    self.title,
                    "n (observations)",
                    "|theta_hat - theta*|",
                    true,
                    &[(1, "mean abs error", SeriesStyle::Line)],
                )
            }
            F6 => {
                let tr = run_scenario(cfg)?;
                let rows = tr
                    .rows
                    .iter()
                    .map(|r| vec![Some(r.t as f64), Some(r.b_true), Some(r.post_mean), r.window_est])
                    .collect();
                FigureData::table(&["t", "b_true", "post_mean", "window_est"], rows).chart(
                    self.title,
                    "t",
                    "estimate",
                    false,
                    &[
                        (3, "window (W=200)", SeriesStyle::Line),
                        (2, "conjugate", SeriesStyle::Line),
                        (1, "b_true", SeriesStyle::Dashed),
                    ],
                )
            }
            F7 | E2_4 => {
                let tr = run_scenario(cfg)?;
                let window = AuditPolicy::default().pred_window;
                let rows = decoupling_rows(&tr.rows, window)?;
                FigureData::table(&["post_var", "pred_err_rolling"], rows).chart(
                    self.title,
                    "posterior variance",
                    "rolling predictive error",
                    true,
                    &[(1, "pred_err (rolling)", SeriesStyle::Points)],
                )
            }
        };
        Ok(data)
    }
}

/// `(post_var, rolling pred_err)` for every step whose rolling window is full.
fn decoupling_rows(rows: &[crate::TraceRow], window: usize) -> Result<Vec<Vec<Option<f64>>>> {
    let pred: Vec<f64> = rows.iter().skip(1).filter_map(|r| r.pred_err).collect();
    let rolling = rolling_mean(&pred, window);
    // rolling[i] ends at pred[i + window - 1], i.e. trace row index i + window.
    Ok(rolling
        .iter()
        .enumerate()
        .map(|(i, m)| vec![Some(rows[i + window].post_var), Some(*m)])
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub chart: Chart,
}

impl FigureData {
    fn table(columns: &[&str], rows: Vec<Vec<Option<f64>>>) -> Partial {
        Partial {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| fmt_cell(*v)))?;
        }
        w.into_inner()
            .map_err(|e| Error::Data(format!("csv buffer: {}", e.error())))
    }
}

struct Partial {
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl Partial {
    /// Attach a chart plotting columns against column 0.
    fn chart(
        self,
        title: &str,
        x_label: &str,
        y_label: &str,
        log_x: bool,
        plotted: &[(usize, &str, SeriesStyle)],
    ) -> FigureData {
        let series = plotted
            .iter()
            .map(|(col, name, style)| {
                let pts = self
                    .rows
                    .iter()
                    .filter_map(|r| Some((r[0]?, r[*col]?)))
                    .collect();
                Series::new(*name, pts, *style)
            })
            .collect();
        FigureData {
            columns: self.columns,
            rows: self.rows,
            chart: Chart {
                title: title.to_string(),
                x_label: x_label.to_string(),
                y_label: y_label.to_string(),
                log_x,
                series,
            },
        }
    }
}

/// Write `<id>.csv` and `<id>.svg` into `out_dir` and return their paths.
pub fn reproduce_figure(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let data = FigurePreset::get(id).render()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join(format!("{id}.csv"));
    let svg_path = out_dir.join(format!("{id}.svg"));
    std::fs::write(&csv_path, data.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
    std::fs::write(&svg_path, data.chart.render()).map_err(|e| Error::io(&svg_path, e))?;
    Ok(vec![csv_path, svg_path])
}
