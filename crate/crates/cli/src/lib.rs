//! `dirac2b` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation breaks down, 2 on usage errors (bad flags, inadmissible
//! coupling, dense size cap).

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use dirac2b_core::suites::{Check, SCHEMA_VERSION};
use dirac2b_core::CouplingReport;

pub use config::{parse_config, CommandKind, Format, RunConfig, Which};

pub const THREADS_ENV: &str = "DIRAC2B_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dirac2b_core::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dirac2b_core::Error as E;
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) | CliError::Output { .. } => 2,
            CliError::Core(E::SizeCap { .. } | E::Inadmissible { .. } | E::InvalidGrid(_) | E::OutOfRange { .. }) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
}

pub const ARTIFACT: Artifact = Artifact { name: "dirac2b", version: env!("CARGO_PKG_VERSION") };

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact: Artifact,
    pub command: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingReport>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: Value,
}

impl Report {
    pub fn new(config: &RunConfig, coupling: Option<CouplingReport>, checks: Vec<Check>, results: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            artifact: ARTIFACT,
            command: config.command.name(),
            config: config.clone(),
            coupling,
            passed: checks.iter().all(|c| c.passed),
            checks,
            results,
        }
    }
}

/// Caps the rayon pool from `DIRAC2B_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={v}: expected a positive integer")))?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Flattens a JSON value into `path,value` rows.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

pub fn render(report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    let fail = |e: String| CliError::Output { path: "report".into(), message: e };
    let value = serde_json::to_value(report).map_err(|e| fail(e.to_string()))?;
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).map_err(|e| fail(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"]).map_err(|e| fail(e.to_string()))?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| fail(e.to_string()))?;
            }
            w.into_inner().map_err(|e| fail(e.to_string()))
        }
    }
}

fn write_report(report: &Report, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = render(report, cfg.format)?;
    let path = Path::new(&cfg.out);
    std::fs::write(path, bytes).map_err(|e| CliError::Output { path: cfg.out.clone(), message: e.to_string() })
}

fn summarize(report: &Report, out: &mut impl Write) {
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{tag} {} = {:.6e} ({} {:e})", c.name, c.value, c.relation, c.limit);
    }
}

/// Runs a validated configuration, writes the report and returns it.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = commands::execute(cfg)?;
    write_report(&report, cfg)?;
    Ok(report)
}

pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = configure_threads().and_then(|_| parse_config(argv)).and_then(|cfg| run(&cfg).map(|r| (cfg, r)));
    match outcome {
        Ok((cfg, report)) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            summarize(&report, &mut lock);
            let _ = writeln!(lock, "{} report written to {}", if report.passed { "PASS" } else { "FAIL" }, cfg.out);
            if report.passed {
                0
            } else {
                1
            }
        }
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("dirac2b: {e}");
            e.exit_code()
        }
    }
}
