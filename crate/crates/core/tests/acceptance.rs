//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use driftaudit::audit::{calibrate_policy, checkpoint_steps, decoupling_statistic, AuditPolicy};
use driftaudit::diagnostics::{blocked_trend, kendall_tau_test, prop1_limit, prop1_tolerance, residual_stats};
use driftaudit::harness::{reproduce_figure, run_scenario, run_seeds, FigureId, FigurePreset, RunTrace};
use driftaudit::{DriftSpec, ScenarioConfig};
use rand::{Rng, SeedableRng};

use common::{exact_two_sided, inversion_counts, mean, pair_counts};

const SEEDS: usize = 100;
const BASE_SEED: u64 = 1_000;
const ALPHA: f64 = 0.002;
const SIGMA_RW: f64 = 0.01;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn linear(n: usize) -> ScenarioConfig {
    ScenarioConfig::default()
        .with_drift(DriftSpec::linear(ALPHA))
        .with_n(n)
        .with_seed(BASE_SEED)
}

fn null(n: usize) -> ScenarioConfig {
    ScenarioConfig::default().with_n(n).with_seed(BASE_SEED)
}

fn random_walk(n: usize) -> ScenarioConfig {
    null(n).with_drift(DriftSpec::random_walk(SIGMA_RW))
}

fn runs(cfg: &ScenarioConfig) -> Vec<RunTrace> {
    run_seeds(cfg, SEEDS).expect("scenario runs")
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Count of traces whose final posterior mean lies within the bias-limit tolerance.
fn prop1_hits(traces: &[RunTrace]) -> (usize, f64) {
    let mut worst: f64 = 0.0;
    let hits = traces
        .iter()
        .filter(|tr| {
            let c = &tr.config;
            let b: Vec<f64> = tr.rows.iter().map(|r| r.b_true).collect();
            let limit = prop1_limit(&b, c.theta_star).unwrap();
            let tol = prop1_tolerance(limit, c.sigma, c.n, c.prior_mean, c.prior_var);
            let gap = (tr.final_row().post_mean - limit).abs();
            worst = worst.max(gap / tol);
            gap <= tol
        })
        .count();
    (hits, worst)
}

fn c1_prop1_oracle() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, cfg) in [("none", null(5000)), ("linear", linear(5000)), ("random_walk", random_walk(5000))] {
        let (hits, worst) = prop1_hits(&runs(&cfg));
        ok &= hits == SEEDS;
        parts.push(format!("{name} {hits}/{SEEDS} (max gap/tol {worst:.3})"));
    }
    verdict(ok, parts.join(", "))
}

fn c2_error_grows_with_data() -> Check {
    let traces = runs(&linear(5000));
    let finals: Vec<f64> = traces.iter().map(|t| t.final_row().abs_error).collect();
    let m = mean(&finals);
    let grew = traces
        .iter()
        .filter(|t| t.at(5000).unwrap().abs_error > t.at(500).unwrap().abs_error)
        .count();
    verdict(
        (m - 5.001).abs() <= 0.01 && grew >= 99,
        format!("mean final abs_error {m:.5} (target 5.001 +/- 0.01), grew in {grew}/100"),
    )
}

fn c3_no_drift_control() -> Check {
    let traces = runs(&null(5000));
    let at = |n: usize| mean(&traces.iter().map(|t| t.at(n).unwrap().abs_error).collect::<Vec<_>>());
    let (e500, e5000) = (at(500), at(5000));
    let small = traces.iter().filter(|t| t.final_row().post_mean.abs() < 0.06).count();
    verdict(
        e500 > e5000 && small >= 99,
        format!("mean abs_error n=500 {e500:.5} > n=5000 {e5000:.5}; |theta_hat| < 0.06 in {small}/100"),
    )
}

fn c4_sliding_window() -> Check {
    let traces = runs(&linear(5000).with_window(200));
    let m = mean(&traces.iter().map(|t| t.final_row().window_est.unwrap()).collect::<Vec<_>>());
    verdict(
        (m - 9.801).abs() <= 0.05,
        format!("mean window estimate at t=5000 {m:.5} (target 9.801 +/- 0.05)"),
    )
}

fn c5_residuals() -> Check {
    let n = 2000usize;
    let traces = runs(&linear(n));
    let stats: Vec<_> = traces
        .iter()
        .map(|t| {
            let y: Vec<f64> = t.rows.iter().map(|r| r.y).collect();
            residual_stats(&y, t.final_row().post_mean).unwrap()
        })
        .collect();
    let m = mean(&stats.iter().map(|s| s.mean).collect::<Vec<_>>());
    let v = mean(&stats.iter().map(|s| s.variance).collect::<Vec<_>>());
    let nf = n as f64;
    let target = 1.0 + ALPHA * ALPHA * (nf * nf - 1.0) / 12.0;
    verdict(
        m.abs() <= 0.01 && (v - target).abs() <= 0.15,
        format!("mean residual {m:.2e}; mean residual variance {v:.4} (target {target:.4} +/- 0.15)"),
    )
}

fn c6_random_walk() -> Check {
    let rw = runs(&random_walk(5000));
    let base = runs(&null(5000));
    let m_rw = mean(&rw.iter().map(|t| t.final_row().abs_error).collect::<Vec<_>>());
    let m_null = mean(&base.iter().map(|t| t.final_row().abs_error).collect::<Vec<_>>());
    let (hits, _) = prop1_hits(&rw);
    let ratio = m_rw / m_null;
    verdict(
        ratio >= 5.0 && hits == SEEDS,
        format!("random-walk/no-drift mean final abs_error {m_rw:.4}/{m_null:.4} = {ratio:.1}x; bias-limit oracle {hits}/100"),
    )
}

fn c7_kendall() -> Check {
    let table = inversion_counts(50);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (mut tau_mismatch, mut worst_p) = (0usize, 0.0f64);
    for _ in 0..1000 {
        let len = rng.random_range(3..=50usize);
        let x: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let r = kendall_tau_test(&x).unwrap();
        let (c, d) = pair_counts(&x);
        let pairs = (len * (len - 1) / 2) as f64;
        if r.tau != (c - d) as f64 / pairs || r.s != c - d {
            tau_mismatch += 1;
        }
        worst_p = worst_p.max((r.p_value - exact_two_sided(&table[len], d as usize)).abs());
    }

    let rejections = (0..1000u64)
        .filter(|i| {
            let recs = driftaudit::generate_stream(&null(5000).with_seed(50_000 + i)).unwrap();
            let y: Vec<f64> = recs.iter().map(|r| r.y).collect();
            blocked_trend(&y, 20).unwrap().p_value < 0.05
        })
        .count();
    let rate = rejections as f64 / 1000.0;
    verdict(
        tau_mismatch == 0 && worst_p <= 1e-12 && (rate - 0.05).abs() <= 0.02,
        format!("tau mismatches {tau_mismatch}/1000, max |p - exact| {worst_p:.1e}; null rejection rate {rate:.3} (0.05 +/- 0.02)"),
    )
}

fn c8_decoupling_audit() -> Check {
    let f3 = FigurePreset::get(FigureId::F3).config.with_seed(BASE_SEED);
    let f4 = FigurePreset::get(FigureId::F4).config.with_seed(BASE_SEED);
    let report = calibrate_policy(
        &[("F3".to_string(), f3), ("F4".to_string(), f4)],
        SEEDS,
        &AuditPolicy::default(),
    )
    .map_err(|e| e.to_string())?;
    let flag_drift = report.rate("F3", "decoupling").unwrap();
    let flag_null = report.rate("F4", "decoupling").unwrap();
    let suspend = report.status_rates("F3").unwrap().suspend;
    let proceed = report.status_rates("F4").unwrap().proceed;
    verdict(
        flag_drift >= 0.90 && flag_null <= 0.10 && suspend >= 0.85 && proceed >= 0.85,
        format!(
            "decoupling flag rate drift {flag_drift:.2} (>= 0.90), no-drift {flag_null:.2} (<= 0.10); \
             Suspend {suspend:.2} (>= 0.85), Proceed {proceed:.2} (>= 0.85)"
        ),
    )
}

fn c9_determinism() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut differing = Vec::new();
    for id in FigureId::ALL {
        reproduce_figure(id, a.path()).map_err(|e| e.to_string())?;
        reproduce_figure(id, b.path()).map_err(|e| e.to_string())?;
        let name = format!("{id}.csv");
        if std::fs::read(a.path().join(&name)).unwrap() != std::fs::read(b.path().join(&name)).unwrap() {
            differing.push(name);
        }
    }

    let mut worst: f64 = 0.0;
    let configs = [
        linear(5000),
        null(5000),
        random_walk(5000),
        ScenarioConfig { sigma: 2.5, prior_mean: 1.0, prior_var: 3.0, ..linear(3000) },
    ];
    for cfg in &configs {
        let tr = run_scenario(cfg).unwrap();
        let s2 = cfg.sigma * cfg.sigma;
        for t in 1..=tr.len() {
            let sum: f64 = tr.rows[..t].iter().map(|r| r.y).sum();
            let var = 1.0 / (1.0 / cfg.prior_var + t as f64 / s2);
            let batch = (cfg.prior_mean / cfg.prior_var + sum / s2) * var;
            let got = tr.rows[t - 1].post_mean;
            worst = worst.max((got - batch).abs() / batch.abs().max(f64::MIN_POSITIVE));
        }
    }
    verdict(
        differing.is_empty() && worst <= 1e-10,
        format!(
            "{} presets byte-identical ({} differ); max streaming/batch relative gap {worst:.1e}",
            FigureId::ALL.len(),
            differing.len()
        ),
    )
}

fn read_columns(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect::<Vec<_>>();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        for (i, cell) in rec.unwrap().iter().enumerate() {
            cols[i].push(cell.parse::<f64>().unwrap_or(f64::NAN));
        }
    }
    (header, cols)
}

fn c10_figure_shapes() -> Check {
    let dir = tempfile::tempdir().unwrap();
    for id in [FigureId::F1, FigureId::F2, FigureId::F7] {
        reproduce_figure(id, dir.path()).map_err(|e| e.to_string())?;
    }
    let sigma = FigurePreset::get(FigureId::F1).config.sigma;

    let (h1, f1) = read_columns(&dir.path().join("F1.csv"));
    let y = &f1[h1.iter().position(|c| c == "y").unwrap()];
    let max_jump = y.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);

    let (h2, f2) = read_columns(&dir.path().join("F2.csv"));
    let pv = &f2[h2.iter().position(|c| c == "post_var").unwrap()];
    let contracting = pv.windows(2).all(|w| w[1] < w[0]);

    let (h7, f7) = read_columns(&dir.path().join("F7.csv"));
    assert_eq!(h7, ["post_var", "pred_err_rolling"]);
    let policy = AuditPolicy::default();
    let idx: Vec<usize> = checkpoint_steps(f7[0].len(), policy.decouple_horizon)
        .into_iter()
        .map(|t| t - 1)
        .collect();
    let cp_var: Vec<f64> = idx.iter().map(|&i| f7[0][i]).collect();
    let cp_err: Vec<f64> = idx.iter().map(|&i| f7[1][i]).collect();
    let (_, cp_contracting, trend) =
        decoupling_statistic(&cp_var, &cp_err, policy.trend_alpha).map_err(|e| e.to_string())?;
    let tau = trend.map_or(0.0, |r| r.tau);

    verdict(
        max_jump <= 6.0 * sigma && contracting && cp_contracting && tau >= 0.0,
        format!(
            "F1 max |dy| {max_jump:.3} (<= {:.1}); F2 post_var strictly decreasing: {contracting}; \
             F7 checkpoint post_var decreasing: {cp_contracting}, rolling pred_err tau {tau:.3} (>= 0)",
            6.0 * sigma
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "bias-limit oracle", c1_prop1_oracle),
        (2, "error grows with data under linear drift", c2_error_grows_with_data),
        (3, "no-drift control", c3_no_drift_control),
        (4, "sliding window under drift", c4_sliding_window),
        (5, "residual statistics", c5_residuals),
        (6, "random-walk drift", c6_random_walk),
        (7, "Kendall tau correctness and null calibration", c7_kendall),
        (8, "decoupling and right-to-infer calibration", c8_decoupling_audit),
        (9, "determinism", c9_determinism),
        (10, "figure shapes", c10_figure_shapes),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (id, name, check) in criteria {
        let t0 = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {id:>2} {name}: {detail} ({:.1}s)", t0.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
