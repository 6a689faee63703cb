use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use predcorr::framework::{CertificateSummary, TraceRecord};
use predcorr::{Family, IterationTrace, Mode};
use serde::Serialize;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const INSTANCE_FILE: &str = "instance.json";

pub const TRACE_COLUMNS: [&str; 6] = ["k", "tau", "gap_at_star", "feasibility", "pointwise_residual", "objective"];

#[derive(Clone, Debug, Serialize)]
pub struct FinalValues {
    pub gap: Option<f64>,
    pub feasibility: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub family: Family,
    pub mode: Mode,
    pub budget: usize,
    pub tau_init: f64,
    pub certificate: CertificateSummary,
    #[serde(rename = "final")]
    pub final_values: FinalValues,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub runtime_seconds: f64,
}

impl RunSummary {
    pub fn new(family: Family, budget: usize, trace: &IterationTrace, runtime_seconds: f64) -> Self {
        let last = trace.last();
        RunSummary {
            family,
            mode: trace.mode,
            budget,
            tau_init: trace.tau_init,
            certificate: trace.certificate,
            final_values: FinalValues {
                gap: last.and_then(|r| r.gap),
                feasibility: last.map(|r| r.feasibility),
                residual: last.map(|r| r.pointwise_residual),
            },
            iterations: trace.iterations(),
            failure: trace.failure.clone(),
            runtime_seconds,
        }
    }
}

fn format_float(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(TRACE_COLUMNS)?;
    for r in records {
        writer.write_record([
            r.k.to_string(),
            format_float(r.tau),
            r.gap.map(format_float).unwrap_or_default(),
            format_float(r.feasibility),
            format_float(r.pointwise_residual),
            format_float(r.objective),
        ])?;
    }
    writer.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `(k, value)` pairs of one trace column; empty fields are skipped.
pub fn read_trace_column(path: &Path, column: &str) -> Result<Vec<(usize, f64)>> {
    ensure!(
        TRACE_COLUMNS[1..].contains(&column),
        "unknown metric {column:?}; expected one of {}",
        TRACE_COLUMNS[1..].join(", ")
    );
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening trace {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        bail!("{} does not have the trace columns {}", path.display(), TRACE_COLUMNS.join(","));
    }
    let idx = TRACE_COLUMNS.iter().position(|c| *c == column).expect("checked above");
    let mut samples = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let field = &row[idx];
        if field.is_empty() {
            continue;
        }
        let k: usize = row[0].parse().with_context(|| format!("row {}: bad k {:?}", line + 1, &row[0]))?;
        let value: f64 = field.parse().with_context(|| format!("row {}: bad {column} {field:?}", line + 1))?;
        samples.push((k, value));
    }
    Ok(samples)
}
