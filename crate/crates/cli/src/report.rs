//! Report envelope and output in JSON or CSV.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::{CliError, CliResult};
use crate::{Common, Format};

/// Flat table written in CSV mode.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

pub fn cell<T: ToString>(v: T) -> String {
    v.to_string()
}

pub fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    timestamp: u64,
    command: &'a str,
    config: &'a Value,
    result: &'a Value,
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

/// Echo of the shared options, recorded in every report.
pub fn common_config(c: &Common) -> Value {
    serde_json::json!({
        "algebra": c.algebra,
        "n": c.n,
        "seed": c.seed,
        "budget": c.budget,
        "mesh_res": c.mesh_res,
        "tolerance": c.tolerance,
    })
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn render(c: &Common, command: &str, config: &Value, result: &Value, table: &Table) -> CliResult<Vec<u8>> {
    match c.format {
        Format::Json => {
            let env = Envelope {
                tool: "srbench",
                version: env!("CARGO_PKG_VERSION"),
                timestamp: timestamp(),
                command,
                config,
                result,
            };
            let mut out = serde_json::to_vec_pretty(&env).expect("envelope serializes");
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Config(format!("csv output: {e}"));
            w.write_record(&table.headers).map_err(io)?;
            for r in &table.rows {
                w.write_record(r).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Config(format!("csv output: {e}")))
        }
    }
}

/// Writes the report to `--out` or stdout.
pub fn emit(c: &Common, command: &str, config: &Value, result: &Value, table: &Table) -> CliResult<()> {
    let bytes = render(c, command, config, result, table)?;
    match &c.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Config(format!("stdout: {e}"))),
    }
}
