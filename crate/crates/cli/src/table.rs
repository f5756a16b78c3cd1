//! Numeric tables written as CSV (`{:.16e}`, 17 significant digits) or JSON.

use serde::Serialize;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    #[serde(skip)]
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<I>(name: &str, columns: I) -> Self
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        Table {
            name: name.to_string(),
            columns: columns.into_iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<(), CliError> {
        let (ext, body) = match format {
            Format::Csv => ("csv", self.to_csv()),
            Format::Json => ("json", self.to_json()),
        };
        let path = dir.join(format!("{}.{ext}", self.name));
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// `[re, im]` column names for a complex quantity.
pub fn complex_columns(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}
