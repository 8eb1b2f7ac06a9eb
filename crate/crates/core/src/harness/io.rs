use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::TraceRow;
use crate::error::{Error, Result};

use super::ReplicateSummary;

pub const TRACE_COLUMNS: [&str; 8] = [
    "t",
    "y",
    "b_true",
    "post_mean",
    "post_var",
    "abs_error",
    "pred_err",
    "window_est",
];

const SUMMARY_COLUMNS: [&str; 8] = [
    "checkpoint",
    "n_seeds",
    "abs_error_mean",
    "abs_error_sd",
    "post_var_mean",
    "post_var_sd",
    "pred_err_mean",
    "pred_err_sd",
];

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Shortest round-tripping decimal; empty for an absent value.
pub(crate) fn fmt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TRACE_COLUMNS)?;
    for r in rows {
        out.write_record([
            r.t.to_string(),
            fmt_cell(Some(r.y)),
            fmt_cell(Some(r.b_true)),
            fmt_cell(Some(r.post_mean)),
            fmt_cell(Some(r.post_var)),
            fmt_cell(Some(r.abs_error)),
            fmt_cell(r.pred_err),
            fmt_cell(r.window_est),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(v) => Err(Error::Data(format!("row {row}: column `{column}` is not finite ({v})"))),
        Err(_) => Err(Error::Data(format!(
            "row {row}: column `{column}` has unparseable value `{raw}`"
        ))),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Read a trace CSV written by [`write_trace_csv`]. The header must match
/// [`TRACE_COLUMNS`] exactly and `t` must run `1, 2, ...`.
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(open(path)?);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != TRACE_COLUMNS {
        return Err(Error::Data(format!(
            "trace header must be `{}`, got `{}`",
            TRACE_COLUMNS.join(","),
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let required = |col: usize| -> Result<f64> {
            parse_cell(&rec[col], row, TRACE_COLUMNS[col])?
                .ok_or_else(|| Error::Data(format!("row {row}: `{}` is empty", TRACE_COLUMNS[col])))
        };
        let t: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Data(format!("row {row}: bad step index `{}`", &rec[0])))?;
        if t != row {
            return Err(Error::Data(format!("row {row}: expected t = {row}, got {t}")));
        }
        rows.push(TraceRow {
            t,
            y: required(1)?,
            b_true: required(2)?,
            post_mean: required(3)?,
            post_var: required(4)?,
            abs_error: required(5)?,
            pred_err: parse_cell(&rec[6], row, TRACE_COLUMNS[6])?,
            window_est: parse_cell(&rec[7], row, TRACE_COLUMNS[7])?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: trace has no rows", path.display())));
    }
    Ok(rows)
}

pub fn write_summary_csv<W: Write>(summary: &ReplicateSummary, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SUMMARY_COLUMNS)?;
    for r in &summary.rows {
        out.write_record([
            r.checkpoint.to_string(),
            summary.n_seeds.to_string(),
            fmt_cell(Some(r.abs_error.mean)),
            fmt_cell(r.abs_error.sd),
            fmt_cell(Some(r.post_var.mean)),
            fmt_cell(r.post_var.sd),
            fmt_cell(r.pred_err.map(|p| p.mean)),
            fmt_cell(r.pred_err.and_then(|p| p.sd)),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read `(time, value)` pairs from a CSV with a header row.
///
/// Without a time column, time is the 1-based data row number. With one, the
/// output is stably sorted by time. Row numbers in errors count data rows from
/// 1, excluding the header. No row is skipped silently.
pub fn ingest_csv(path: &Path, value_column: &str, time_column: Option<&str>) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Data(format!("{}: file is empty", path.display())));
    }
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: no column named `{name}`", path.display())))
    };
    let value_idx = find(value_column)?;
    let time_idx = time_column.map(find).transpose()?;

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = rec.get(idx).unwrap_or("");
            parse_cell(raw, row, name)?
                .ok_or_else(|| Error::Data(format!("row {row}: column `{name}` is empty")))
        };
        let value = cell(value_idx, value_column)?;
        let time = match (time_idx, time_column) {
            (Some(idx), Some(name)) => cell(idx, name)?,
            _ => row as f64,
        };
        out.push((time, value));
    }
    if out.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    if time_idx.is_some() {
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(out)
}
