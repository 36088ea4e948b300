//! Table assembly and serialization.
//!
//! CSV uses '.' decimals, ',' separators and '#'-prefixed comment lines
//! carrying the configuration, so a result file is reproducible from its
//! own header. All floats are printed with 17 significant digits, which
//! round-trips 64-bit values exactly.

use crate::config::{Format, JobConfig};
use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Num(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fmt_f64(*v),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Num(v) => serde_json::Value::from(*v),
        }
    }
}

/// A rectangular result table with fixed column names.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for line in provenance {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, command: &str, provenance: &[String]) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "command": command,
            "config": provenance,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    pub fn render(&self, cfg: &JobConfig, command: &str, extra: &[String]) -> String {
        let provenance = cfg.provenance(command, extra);
        match cfg.format {
            Format::Csv => self.to_csv(&provenance),
            Format::Json => self.to_json(command, &provenance),
        }
    }
}

/// Write to the configured path, or stdout when none is set.
pub fn emit(out: Option<&Path>, payload: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout().write_all(payload.as_bytes()).context("cannot write to stdout")
        }
    }
}
