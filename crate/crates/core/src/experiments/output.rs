//! Sweep results and their CSV/JSON encodings.
//!
//! The CSV starts with `# key: value` metadata lines, followed by a header
//! row and one row per sweep point. Infeasible or undefined values are
//! written as `NaN` (`null` in JSON). Numbers use the shortest decimal form
//! that round-trips, so a fixed seed gives byte-identical files.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One named output series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Everything an experiment run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Ordered `(key, value)` metadata.
    pub metadata: Vec<(String, String)>,
    pub variable: String,
    pub grid: Vec<f64>,
    pub columns: Vec<Column>,
}

impl SweepResult {
    pub fn new(variable: &str, grid: Vec<f64>) -> Self {
        Self {
            metadata: Vec::new(),
            variable: variable.to_string(),
            grid,
            columns: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub(crate) fn push_column(&mut self, name: String, values: Vec<f64>) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::Invariant(format!(
                "column `{name}` has {} values for {} grid points",
                values.len(),
                self.grid.len()
            )));
        }
        if name == self.variable || self.column(&name).is_some() {
            return Err(Error::Invariant(format!("duplicate column `{name}`")));
        }
        self.columns.push(Column { name, values });
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.metadata {
            for line in v.lines() {
                writeln!(out, "# {k}: {line}")?;
            }
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.variable.clone()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        w.write_record(&header).map_err(csv_err)?;
        for (i, x) in self.grid.iter().enumerate() {
            let mut row = vec![x.to_string()];
            row.extend(self.columns.iter().map(|c| c.values[i].to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: serde_json::Map<String, serde_json::Value>,
            variable: &'a str,
            grid: &'a [f64],
            columns: serde_json::Map<String, serde_json::Value>,
        }
        let metadata = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let columns = self
            .columns
            .iter()
            .map(|c| (c.name.clone(), serde_json::json!(c.values)))
            .collect();
        let mut bytes = serde_json::to_vec_pretty(&Doc {
            metadata,
            variable: &self.variable,
            grid: &self.grid,
            columns,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv()?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json()?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
