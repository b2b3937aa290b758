//! Report assembly and atomic file emission.
//!
//! Reports are deterministic for a fixed (config, seed): object keys are
//! sorted, floats use shortest round-trip formatting, and wall time goes to
//! stderr rather than into the serialized report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Resolved configuration echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub d: Option<usize>,
    pub cap: Option<usize>,
    pub expansion_cap: Option<usize>,
    pub rank_tol: f64,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub grid: Option<String>,
    pub format: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho, results: Value, warnings: Vec<String>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            config,
            results,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Print to stdout or write atomically to the configured path.
    pub fn emit(&self, output: Option<&Path>) -> Result<(), CliError> {
        let text = self.to_json();
        match output {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => write_atomic(path, text.as_bytes()),
        }
    }
}

/// Write via a sibling temporary file and rename, so failures never leave a
/// partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", tmp.display())))?;
        f.write_all(bytes)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", tmp.display())))?;
        f.sync_all().ok();
    }
    fs::rename(&tmp, path)
        .map_err(|e| CliError::input(format!("cannot rename into {}: {e}", path.display())))
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn point_json(p: &[Complex64]) -> Value {
    Value::Array(p.iter().map(|z| complex_json(*z)).collect())
}

/// One row of a spectrum grid scan.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub re: f64,
    pub im: f64,
    pub membership: bool,
    pub dirac_sigma_min: f64,
}

/// Serialize grid rows as CSV (fixed header, rows in grid-index order) or as
/// a JSON array.
pub fn render_grid(rows: &[GridRow], format: &str) -> Result<Vec<u8>, CliError> {
    match format {
        "csv" => {
            let mut out = String::from("re,im,membership,dirac_sigma_min\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.re,
                    r.im,
                    u8::from(r.membership),
                    r.dirac_sigma_min
                ));
            }
            Ok(out.into_bytes())
        }
        "json" => {
            let points: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "re": r.re,
                        "im": r.im,
                        "membership": u8::from(r.membership),
                        "dirac_sigma_min": r.dirac_sigma_min,
                    })
                })
                .collect();
            let doc = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "points": points,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("grid serializes");
            text.push('\n');
            Ok(text.into_bytes())
        }
        other => Err(CliError::input(format!(
            "unknown format '{other}' (expected json or csv)"
        ))),
    }
}
