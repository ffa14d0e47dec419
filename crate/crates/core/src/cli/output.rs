//! Tabular output: CSV with 17 significant digits, or a single JSON object.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Integer,
    Real,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn real(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Real,
        }
    }

    pub fn integer(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Integer,
        }
    }
}

/// A data table produced by one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub command: String,
    pub params: Value,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

/// JSON document layout.
#[derive(Debug, Serialize, Deserialize)]
pub struct JsonTable {
    pub command: String,
    pub params: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: String,
}

pub fn provenance() -> String {
    format!("fockmetric {}", env!("CARGO_PKG_VERSION"))
}

impl Table {
    pub fn new(command: &str, params: Value, columns: Vec<Column>) -> Self {
        Self {
            command: command.to_string(),
            params,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.column_names()).map_err(csv_err)?;
        for row in &self.rows {
            let fields = row
                .iter()
                .zip(&self.columns)
                .map(|(&v, c)| format_value(v, c.kind));
            w.write_record(fields).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> JsonTable {
        JsonTable {
            command: self.command.clone(),
            params: self.params.clone(),
            columns: self.column_names(),
            rows: self.rows.clone(),
            provenance: provenance(),
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

fn format_value(v: f64, kind: ColumnKind) -> String {
    match kind {
        ColumnKind::Integer if v.fract() == 0.0 && v.abs() < 9.0e15 => format!("{}", v as i64),
        _ => format!("{v:.16e}"),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Parse a CSV written by [`Table::write_csv`] into header and numeric rows.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad number {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
