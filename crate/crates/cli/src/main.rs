use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use driftaudit::audit::{right_to_infer, AuditPolicy, AuditStatus};
use driftaudit::diagnostics::{blocked_trend, kendall_tau_test, prop1_limit, residual_stats};
use driftaudit::harness::{
    ingest_csv, read_trace_csv, replicate, reproduce_figure, run_scenario, write_summary_csv,
    write_trace_csv, FigureId,
};
use driftaudit::ScenarioConfig;
use serde_json::json;

/// Exit status when an audit returns `Suspend`.
const EXIT_SUSPEND: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "driftaudit",
    version,
    about = "Simulate and audit stationary sequential inference under unobservable drift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its trace CSV. Prints run metadata as JSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed (recorded in the metadata).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the run metadata JSON here.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Residual statistics, final absolute error and bias-limit gap of a trace.
    Diagnose {
        trace: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta_star: f64,
    },
    /// Right-to-infer verdict for a trace. Exits 3 on Suspend.
    Audit {
        trace: PathBuf,
        /// Policy JSON; defaults apply to missing fields.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Kendall trend test of a CSV column against time.
    Trend {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        value_col: String,
        #[arg(long)]
        time_col: Option<String>,
        /// Test block means instead of raw values.
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Across-seed summary at checkpoints, as CSV.
    Replicate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seeds: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write <FIGURE>.csv and <FIGURE>.svg for a preset.
    Reproduce {
        #[arg(long)]
        figure: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::from_json(&read_to_string(path)?)
        .with_context(|| format!("config {}", path.display()))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            meta,
        } => {
            let config = load_config(&config, seed)?;
            let mut trace = run_scenario(&config)?;
            trace.metadata.seed_overridden = seed.is_some();
            write_trace_csv(&trace.rows, create(&out)?)?;
            if let Some(meta) = meta {
                serde_json::to_writer_pretty(create(&meta)?, &trace.metadata)?;
            }
            print_json(&trace.metadata)?;
        }
        Command::Diagnose { trace, theta_star } => {
            let rows = read_trace_csv(&trace)?;
            let last = rows.last().expect("reader rejects empty traces");
            let y: Vec<f64> = rows.iter().map(|r| r.y).collect();
            let b: Vec<f64> = rows.iter().map(|r| r.b_true).collect();
            let limit = prop1_limit(&b, theta_star)?;
            let residuals = if rows.len() >= 2 {
                Some(residual_stats(&y, last.post_mean)?)
            } else {
                None
            };
            print_json(&json!({
                "n": rows.len(),
                "final_post_mean": last.post_mean,
                "final_post_var": last.post_var,
                "abs_error": (last.post_mean - theta_star).abs(),
                "residuals": residuals,
                "prop1_limit": limit,
                "prop1_gap": (last.post_mean - limit).abs(),
            }))?;
        }
        Command::Audit { trace, policy } => {
            let policy = match policy {
                Some(p) => AuditPolicy::from_json(&read_to_string(&p)?)
                    .with_context(|| format!("policy {}", p.display()))?,
                None => AuditPolicy::default(),
            };
            let rows = read_trace_csv(&trace)?;
            let verdict = right_to_infer(&rows, &policy)?;
            print_json(&verdict)?;
            if verdict.status == AuditStatus::Suspend {
                return Ok(ExitCode::from(EXIT_SUSPEND));
            }
        }
        Command::Trend {
            input,
            value_col,
            time_col,
            blocks,
        } => {
            let series = ingest_csv(&input, &value_col, time_col.as_deref())?;
            let values: Vec<f64> = series.into_iter().map(|(_, v)| v).collect();
            let result = match blocks {
                Some(b) => blocked_trend(&values, b)?,
                None => kendall_tau_test(&values)?,
            };
            print_json(&result)?;
        }
        Command::Replicate {
            config,
            seeds,
            seed,
            out,
        } => {
            let config = load_config(&config, seed)?;
            let summary = replicate(&config, seeds)?;
            match out {
                Some(path) => write_summary_csv(&summary, create(&path)?)?,
                None => write_summary_csv(&summary, io::stdout().lock())?,
            }
        }
        Command::Reproduce { figure, out } => {
            let id: FigureId = figure.parse()?;
            let files = reproduce_figure(id, &out)?;
            print_json(&json!({ "figure": id.as_str(), "files": files }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Usage errors exit 2; --help / --version exit 0.
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
