//! Tabular and JSON rendering of command results.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

/// A CSV table: a header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// The result of a command in both output formats.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub json: Value,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.header)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                w.into_inner()
                    .map_err(|e| CliError::Computation(format!("output: {e}")))
            }
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json)
                    .map_err(|e| CliError::Computation(format!("output: {e}")))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }

    /// Writes to `path`, or to stdout when there is none.
    pub fn write(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, bytes)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(&bytes)?;
                stdout.flush()?;
            }
        }
        Ok(())
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Column names `prefix_1 .. prefix_n`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}
