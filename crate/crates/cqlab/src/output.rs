//! CSV results plus a JSON report holding the resolved configuration.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;

/// Rows of one CSV table with a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_to<W: Write>(&self, w: W) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest representation that round-trips, so reruns compare bit for bit.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// `results.csv` → `results.config.json`.
pub fn report_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.config.json"))
}

/// Writes the table to `out` (stdout when `None`) and the report next to it
/// (stderr when `None`).
pub fn emit(
    out: Option<&Path>,
    command: &str,
    config: &impl Serialize,
    summary: Value,
    table: &Table,
) -> CliResult<()> {
    let report = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "config": serde_json::to_value(config).expect("configs serialise"),
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&report).expect("reports serialise");
    match out {
        Some(path) => {
            table.write_to(File::create(path)?)?;
            std::fs::write(report_path(path), text + "\n")?;
        }
        None => {
            table.write_to(io::stdout().lock())?;
            eprintln!("{text}");
        }
    }
    Ok(())
}
