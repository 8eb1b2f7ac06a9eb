//! Simulation and auditing of stationarity-assuming sequential inference when
//! the observation process carries a slowly drifting, unobservable bias.
//!
//! - [`drift`]: seeded observation streams `y_t = theta* + eps_t + b_t`.
//! - [`estimators`]: conjugate Gaussian updating and a sliding-window mean.
//! - [`diagnostics`]: absolute error, residual statistics, the time-averaged
//!   bias limit, Kendall trend tests, cumulative estimates.
//! - [`audit`]: confidence/predictive-validity decoupling and right-to-infer verdicts.
//! - [`harness`]: scenario runs, replication, figure presets, CSV/SVG output.

pub mod audit;
pub mod diagnostics;
pub mod drift;
pub mod error;
pub mod estimators;
pub mod harness;

pub use audit::{
    calibrate_policy, decoupling_detect, right_to_infer, AuditPolicy, AuditStatus, AuditVerdict,
    CalibrationReport, DecouplingReport, Finding,
};
pub use diagnostics::{
    absolute_error, blocked_trend, cumulative_estimates, kendall_tau_test, prop1_limit,
    prop1_tolerance, residual_stats, CumulativeEstimate, ResidualStats, TraceRow, TrendResult,
};
pub use drift::{
    generate_stream, realize_bias, DriftKind, DriftSpec, ObservationRecord, ScenarioConfig,
};
pub use error::{Error, Result};
pub use estimators::{GaussianPosterior, WindowEstimator};
pub use harness::{
    ingest_csv, read_trace_csv, replicate, reproduce_figure, run_scenario, write_trace_csv,
    FigureId, ReplicateSummary, RunTrace,
};
