use std::path::Path;
use std::process::{Command, Output};

fn driftaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write_config(dir: &Path, drift: &str, n: usize) -> String {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        format!(
            r#"{{"theta_star":0.0,"sigma":1.0,"n":{n},"prior_mean":0.0,"prior_var":100.0,
                "drift":{drift},"seed":42,"window":null}}"#
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn reproduce_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = driftaudit(&["reproduce", "--figure", "F4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("F4.csv").exists());
    assert!(out.join("F4.svg").exists());
    assert_eq!(stdout_json(&o)["figure"], "F4");
    let listing: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert_eq!(listing.len(), 2);

    let o = driftaudit(&["reproduce", "--figure", "F99", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trend_on_increasing_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.csv");
    std::fs::write(&p, "year,x\n2004,3\n2001,0.5\n2002,1\n2003,2\n2005,4.5\n").unwrap();
    let o = driftaudit(&[
        "trend", "--input", p.to_str().unwrap(), "--value-col", "x", "--time-col", "year",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["tau"], 1.0);
    assert_eq!(v["n"], 5);

    let o = driftaudit(&["trend", "--input", p.to_str().unwrap(), "--value-col", "missing"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
}

#[test]
fn simulate_diagnose_audit_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"kind":"linear","alpha":0.002}"#, 5000);
    let trace = dir.path().join("t.csv");
    let trace_s = trace.to_str().unwrap();

    let o = driftaudit(&["simulate", "--config", &config, "--out", trace_s]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = stdout_json(&o);
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["seed_overridden"], false);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), 5001);
    assert!(text.starts_with("t,y,b_true,post_mean,post_var,abs_error,pred_err,window_est\n"));

    let o = driftaudit(&["diagnose", trace_s, "--theta-star", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let d = stdout_json(&o);
    assert!((d["abs_error"].as_f64().unwrap() - 5.0).abs() < 0.1);
    assert!(d["prop1_gap"].as_f64().unwrap() < 5.0 / 5000f64.sqrt());
    assert!(d["residuals"]["variance"].as_f64().unwrap() > 1.5);

    let o = driftaudit(&["audit", trace_s]);
    assert_eq!(o.status.code(), Some(3));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "Suspend");
    assert_eq!(v["evidence"].as_array().unwrap().len(), 2);

    let policy = dir.path().join("policy.json");
    std::fs::write(&policy, r#"{"min_n": 6000}"#).unwrap();
    let o = driftaudit(&["audit", trace_s, "--policy", policy.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn audit_of_stationary_run_proceeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"kind":"none"}"#, 5000);
    let trace = dir.path().join("t.csv");
    let meta = dir.path().join("meta.json");
    let o = driftaudit(&[
        "simulate", "--config", &config, "--out", trace.to_str().unwrap(),
        "--seed", "7", "--meta", meta.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&meta).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
    assert_eq!(m["seed_overridden"], true);

    let o = driftaudit(&["audit", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["status"], "Proceed");
}

#[test]
fn replicate_prints_summary_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"kind":"none"}"#, 600);
    let o = driftaudit(&["replicate", "--config", &config, "--seeds", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "checkpoint,n_seeds,abs_error_mean,abs_error_sd,post_var_mean,post_var_sd,pred_err_mean,pred_err_sd"
    );
    let checkpoints: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(checkpoints, ["50", "100", "200", "500", "600"]);
}

#[test]
fn usage_and_config_errors() {
    assert_eq!(driftaudit(&[]).status.code(), Some(2));
    let o = driftaudit(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(driftaudit(&["trend", "--bogus"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"theta_star":0,"sigma":-1,"n":10,"prior_mean":0,"prior_var":1,"drift":{"kind":"none"},"seed":1}"#).unwrap();
    let out = dir.path().join("t.csv");
    let o = driftaudit(&["simulate", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"theta_star":0,"sigma":1,"n":10,"prior_mean":0,"prior_var":1,"drift":{"kind":"none"},"seed":1,"extra":true}"#).unwrap();
    let o = driftaudit(&["simulate", "--config", unknown.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
