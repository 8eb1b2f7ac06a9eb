//! Governance checks over a completed trace: does confidence still track
//! predictive validity, and is there a time trend in the raw observations?
//!
//! Audits read only what a real pipeline would have: `t`, `y`, `post_var` and
//! `pred_err`. The true bias and the true parameter are never consulted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    blocked_trend, kendall_tau_test_with, Alternative, TraceRow, TrendResult,
};
use crate::drift::{DriftKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::harness::{run_scenario, seed_offset};

pub const DECOUPLING_CHECK: &str = "decoupling";
pub const OBSERVATION_TREND_CHECK: &str = "observation_trend";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditPolicy {
    /// Rolling window for smoothing the predictive error.
    pub pred_window: usize,
    /// Number of checkpoints over the second half of the trace.
    pub decouple_horizon: usize,
    pub trend_blocks: usize,
    /// Significance level shared by both checks.
    pub trend_alpha: f64,
    pub min_n: usize,
}

impl Default for AuditPolicy {
    fn default() -> Self {
        Self {
            pred_window: 50,
            decouple_horizon: 10,
            trend_blocks: 20,
            trend_alpha: 0.01,
            min_n: 200,
        }
    }
}

impl AuditPolicy {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.pred_window < 2 {
            return bad(format!("pred_window must be >= 2, got {}", self.pred_window));
        }
        if self.decouple_horizon < 3 {
            return bad(format!(
                "decouple_horizon must be >= 3, got {}",
                self.decouple_horizon
            ));
        }
        if self.trend_blocks < 3 {
            return bad(format!("trend_blocks must be >= 3, got {}", self.trend_blocks));
        }
        if !(self.trend_alpha > 0.0 && self.trend_alpha < 1.0) {
            return bad(format!("trend_alpha must be in (0, 1), got {}", self.trend_alpha));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let policy: Self = serde_json::from_str(text)?;
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub check: String,
    pub statistic: f64,
    pub threshold: f64,
    pub triggered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AuditStatus {
    Proceed,
    RedFlag,
    Suspend,
}

impl AuditStatus {
    /// Severity from the number of triggered checks out of two.
    pub fn from_triggered(count: usize) -> Self {
        match count {
            0 => AuditStatus::Proceed,
            1 => AuditStatus::RedFlag,
            _ => AuditStatus::Suspend,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub status: AuditStatus,
    pub decoupling_flag: bool,
    /// Kendall trend of the raw observations' block means.
    pub trend: Option<TrendResult>,
    pub evidence: Vec<Finding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub flag: bool,
    /// Checkpoint steps `t`.
    pub checkpoints: Vec<usize>,
    pub post_var: Vec<f64>,
    pub rolling_pred_err: Vec<f64>,
    /// Posterior variance strictly decreasing across the checkpoints.
    pub contracting: bool,
    /// One-sided (increasing) Kendall test of the rolling predictive error;
    /// absent when the checkpoints are all equal.
    pub pred_err_trend: Option<TrendResult>,
    pub evidence: Vec<Finding>,
}

/// Trailing means over every full window: `out[i] = mean(values[i..i + w])`.
pub fn rolling_mean(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// `horizon` equally spaced steps over the second half of `1..=n`, ending at `n`.
pub fn checkpoint_steps(n: usize, horizon: usize) -> Vec<usize> {
    let half = n / 2;
    (1..=horizon).map(|k| half + k * (n - half) / horizon).collect()
}

/// Kendall statistic of the checkpointed rolling predictive error, shared by
/// the audit and the figure-shape checks.
pub fn decoupling_statistic(
    post_var: &[f64],
    rolling_pred_err: &[f64],
    alpha: f64,
) -> Result<(bool, bool, Option<TrendResult>)> {
    let contracting = post_var.windows(2).all(|w| w[1] < w[0]);
    let trend = match kendall_tau_test_with(rolling_pred_err, Alternative::Increasing) {
        Ok(r) => Some(r),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let worsening = trend.is_some_and(|r| r.tau > 0.0 && r.p_value < alpha);
    Ok((contracting && worsening, contracting, trend))
}

fn check_length(rows: &[TraceRow], policy: &AuditPolicy) -> Result<()> {
    policy.validate()?;
    let needed = policy.min_n.max(policy.trend_blocks).max(2 * policy.decouple_horizon);
    if rows.len() < needed {
        return Err(Error::insufficient(needed, rows.len()));
    }
    Ok(())
}

/// Flag traces whose posterior keeps contracting while the smoothed
/// one-step-ahead error trends significantly upward.
pub fn decoupling_detect(rows: &[TraceRow], policy: &AuditPolicy) -> Result<DecouplingReport> {
    check_length(rows, policy)?;
    let n = rows.len();
    let checkpoints = checkpoint_steps(n, policy.decouple_horizon);
    let w = policy.pred_window;
    if checkpoints[0] < w + 1 {
        return Err(Error::insufficient(2 * (w + 1), n));
    }

    let mut post_var = Vec::with_capacity(checkpoints.len());
    let mut rolling = Vec::with_capacity(checkpoints.len());
    for &t in &checkpoints {
        post_var.push(rows[t - 1].post_var);
        let mut sum = 0.0;
        for r in &rows[t - w..t] {
            sum += r.pred_err.ok_or_else(|| {
                Error::Data(format!("trace row t = {} has no predictive error", r.t))
            })?;
        }
        rolling.push(sum / w as f64);
    }

    let (flag, contracting, trend) = decoupling_statistic(&post_var, &rolling, policy.trend_alpha)?;
    let evidence = vec![
        Finding {
            check: "posterior_contraction".into(),
            statistic: post_var.windows(2).filter(|w| w[1] < w[0]).count() as f64
                / (post_var.len() - 1) as f64,
            threshold: 1.0,
            triggered: contracting,
        },
        Finding {
            check: "predictive_error_trend".into(),
            statistic: trend.map_or(1.0, |r| r.p_value),
            threshold: policy.trend_alpha,
            triggered: trend.is_some_and(|r| r.tau > 0.0 && r.p_value < policy.trend_alpha),
        },
    ];
    Ok(DecouplingReport {
        flag,
        checkpoints,
        post_var,
        rolling_pred_err: rolling,
        contracting,
        pred_err_trend: trend,
        evidence,
    })
}

/// Proceed / RedFlag / Suspend from the decoupling check and a blocked trend
/// test on the raw observations.
pub fn right_to_infer(rows: &[TraceRow], policy: &AuditPolicy) -> Result<AuditVerdict> {
    let decoupling = decoupling_detect(rows, policy)?;
    let y: Vec<f64> = rows.iter().map(|r| r.y).collect();
    let trend = blocked_trend(&y, policy.trend_blocks)?;
    let trend_triggered = trend.p_value < policy.trend_alpha;

    let evidence = vec![
        Finding {
            check: DECOUPLING_CHECK.into(),
            statistic: decoupling.pred_err_trend.map_or(1.0, |r| r.p_value),
            threshold: policy.trend_alpha,
            triggered: decoupling.flag,
        },
        Finding {
            check: OBSERVATION_TREND_CHECK.into(),
            statistic: trend.p_value,
            threshold: policy.trend_alpha,
            triggered: trend_triggered,
        },
    ];
    Ok(verdict_from(evidence, decoupling.flag, Some(trend)))
}

/// Assemble a verdict; status is determined by how many findings triggered.
pub fn verdict_from(evidence: Vec<Finding>, decoupling_flag: bool, trend: Option<TrendResult>) -> AuditVerdict {
    let triggered = evidence.iter().filter(|f| f.triggered).count();
    AuditVerdict {
        status: AuditStatus::from_triggered(triggered),
        decoupling_flag,
        trend,
        evidence,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCell {
    pub scenario: String,
    pub check: String,
    pub rate: f64,
    pub triggered: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusRates {
    pub scenario: String,
    pub proceed: f64,
    pub red_flag: f64,
    pub suspend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub policy: AuditPolicy,
    pub n_seeds: usize,
    pub cells: Vec<CalibrationCell>,
    pub status: Vec<StatusRates>,
}

impl CalibrationReport {
    pub fn rate(&self, scenario: &str, check: &str) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.check == check)
            .map(|c| c.rate)
    }

    pub fn status_rates(&self, scenario: &str) -> Option<&StatusRates> {
        self.status.iter().find(|s| s.scenario == scenario)
    }
}

/// Monte Carlo trigger rates of each check, per named scenario, over seeds
/// `seed, seed + 1, ...` of each config.
pub fn calibrate_policy(
    scenarios: &[(String, ScenarioConfig)],
    n_seeds: usize,
    policy: &AuditPolicy,
) -> Result<CalibrationReport> {
    policy.validate()?;
    if n_seeds < 10 {
        return Err(Error::Config(format!("n_seeds must be >= 10, got {n_seeds}")));
    }
    let has_null = scenarios.iter().any(|(_, c)| c.drift.kind == DriftKind::None);
    let has_drift = scenarios.iter().any(|(_, c)| c.drift.kind != DriftKind::None);
    if !(has_null && has_drift) {
        return Err(Error::Config(
            "calibration needs at least one drifting and one no-drift scenario".into(),
        ));
    }

    let mut cells = Vec::new();
    let mut status = Vec::new();
    for (name, config) in scenarios {
        config.validate()?;
        let verdicts: Vec<AuditVerdict> = (0..n_seeds as u64)
            .into_par_iter()
            .map(|i| {
                let trace = run_scenario(&seed_offset(config, i))?;
                right_to_infer(&trace.rows, policy)
            })
            .collect::<Result<_>>()?;

        for check in [DECOUPLING_CHECK, OBSERVATION_TREND_CHECK] {
            let triggered = verdicts
                .iter()
                .filter(|v| v.evidence.iter().any(|f| f.check == check && f.triggered))
                .count();
            cells.push(CalibrationCell {
                scenario: name.clone(),
                check: check.to_string(),
                rate: triggered as f64 / n_seeds as f64,
                triggered,
                runs: n_seeds,
            });
        }
        let frac = |s: AuditStatus| {
            verdicts.iter().filter(|v| v.status == s).count() as f64 / n_seeds as f64
        };
        status.push(StatusRates {
            scenario: name.clone(),
            proceed: frac(AuditStatus::Proceed),
            red_flag: frac(AuditStatus::RedFlag),
            suspend: frac(AuditStatus::Suspend),
        });
    }
    Ok(CalibrationReport {
        policy: *policy,
        n_seeds,
        cells,
        status,
    })
}
