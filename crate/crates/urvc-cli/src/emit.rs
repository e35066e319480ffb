//! Output emission: stdout rendering and the deterministic file set.
//!
//! Every file an invocation writes has a fixed name inside `--out`, and its
//! bytes are a pure function of (config bytes, CLI flags). Floats render
//! through Rust's shortest-round-trip formatting, which is
//! platform-independent.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use urvc_core::channel::TradeoffPoint;
use urvc_core::engine::ScenarioOutput;
use urvc_core::jitter_buffer::write_release_log_csv;
use urvc_core::metrics::write_cdf_csv;
use urvc_core::rrm::{write_availability_csv, AvailabilityPoint};

pub const REPORT_JSON: &str = "report.json";
pub const LATENCY_CDF_CSV: &str = "latency_cdf.csv";
pub const RELEASE_LOG_CSV: &str = "release_log.csv";
pub const NEGOTIATION_TRACE_JSONL: &str = "negotiation_trace.jsonl";
pub const SWEEP_JSON: &str = "sweep.json";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const TRADEOFF_CSV: &str = "tradeoff.csv";
pub const RRM_AVAILABILITY_CSV: &str = "rrm_availability.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn create(dir: &Path, name: &str) -> io::Result<(PathBuf, fs::File)> {
    let path = dir.join(name);
    let file = fs::File::create(&path)?;
    Ok((path, file))
}

/// Writes the full artifact set for one scenario run; returns the paths.
pub fn write_run_outputs(dir: &Path, output: &ScenarioOutput) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let (path, mut file) = create(dir, REPORT_JSON)?;
    file.write_all(output.report.to_json().as_bytes())?;
    written.push(path);

    let (path, file) = create(dir, LATENCY_CDF_CSV)?;
    write_cdf_csv(&output.cdf, file)?;
    written.push(path);

    if output.report.jitter.is_some() {
        let (path, file) = create(dir, RELEASE_LOG_CSV)?;
        write_release_log_csv(&output.release_log, file)?;
        written.push(path);
    }
    if !output.negotiation_trace.is_empty() {
        let (path, mut file) = create(dir, NEGOTIATION_TRACE_JSONL)?;
        for record in &output.negotiation_trace {
            let line = serde_json::to_string(record).expect("record serializes");
            writeln!(file, "{line}")?;
        }
        written.push(path);
    }
    Ok(written)
}

/// One row per sweep point: the axis value plus headline metrics.
pub fn sweep_csv<W: Write>(
    axis: &str,
    values: &[f64],
    outputs: &[ScenarioOutput],
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "{axis},reliability,message_error_probability,availability,failure,plr,\
         mean_sic_iterations,n_messages,n_episodes"
    )?;
    for (value, out) in values.iter().zip(outputs) {
        let s = &out.report.summary;
        let failure = s.failure.map(|f| f.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            value,
            s.reliability,
            s.message_error_probability,
            s.availability,
            failure,
            out.report.mac.plr,
            out.report.mac.mean_sic_iterations,
            s.n_messages,
            s.n_episodes
        )?;
    }
    Ok(())
}

/// Tradeoff curve CSV: measured moments, their standard errors, and the
/// closed forms, one row per threshold. Conditional columns are empty at
/// thresholds no draw survived.
pub fn tradeoff_csv<W: Write>(points: &[TradeoffPoint], mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "threshold,availability,availability_stderr,availability_closed,\
         conditional_reliability,conditional_reliability_stderr,conditional_reliability_closed"
    )?;
    for p in points {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.threshold,
            p.availability,
            p.availability_stderr,
            p.availability_closed,
            opt(p.conditional_reliability),
            opt(p.conditional_reliability_stderr),
            opt(p.conditional_reliability_closed)
        )?;
    }
    Ok(())
}

pub fn write_sweep_outputs(
    dir: &Path,
    axis: &str,
    values: &[f64],
    outputs: &[ScenarioOutput],
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let reports: Vec<_> = outputs.iter().map(|o| &o.report).collect();
    let (path, mut file) = create(dir, SWEEP_JSON)?;
    let mut json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    json.push('\n');
    file.write_all(json.as_bytes())?;
    written.push(path);

    let (path, file) = create(dir, SWEEP_CSV)?;
    sweep_csv(axis, values, outputs, file)?;
    written.push(path);
    Ok(written)
}

pub fn write_tradeoff_outputs(dir: &Path, points: &[TradeoffPoint]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let (path, file) = create(dir, TRADEOFF_CSV)?;
    tradeoff_csv(points, file)?;
    Ok(vec![path])
}

pub fn write_rrm_outputs(dir: &Path, points: &[AvailabilityPoint]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let (path, file) = create(dir, RRM_AVAILABILITY_CSV)?;
    write_availability_csv(points, file)?;
    Ok(vec![path])
}

/// Pretty JSON with a trailing newline, for stdout.
pub fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
