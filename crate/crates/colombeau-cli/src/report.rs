//! Machine-readable reports and CSV emission. Floats print with 17
//! significant digits so the artifacts round-trip bit-exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// One rectangular table: a fixed column header plus rows of floats.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (use csv|json)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub kind: String,
    pub method: String,
    /// "pass" on verdict success, "hypothesis-failed", or "error".
    pub verdict: String,
    pub summary: Vec<String>,
    /// Certificates and diagnostics, serialized per scenario kind.
    pub details: serde_json::Value,
    /// Tables are embedded only in json format; in csv format this lists the
    /// written files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<Table>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub csv_files: Vec<String>,
}

impl Report {
    pub fn new(scenario: &str, kind: &str, method: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            kind: kind.into(),
            method: method.into(),
            verdict: "pass".into(),
            summary: Vec::new(),
            details: serde_json::Value::Null,
            tables: None,
            csv_files: Vec::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

fn csv_of(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Write the report and its tables into `dir`. CSV format writes one file
/// per table plus report.json; JSON format embeds the tables.
pub fn emit(
    dir: &Path,
    mut report: Report,
    tables: Vec<Table>,
    format: OutputFormat,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            for table in &tables {
                let file = dir.join(format!("{}__{}.csv", report.scenario, table.name));
                let mut fh = std::fs::File::create(&file)?;
                fh.write_all(csv_of(table).as_bytes())?;
                report
                    .csv_files
                    .push(file.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
        OutputFormat::Json => {
            report.tables = Some(tables);
        }
    }
    let path = dir.join(format!("{}__report.json", report.scenario));
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(&path, json)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for v in [1.0, -0.1, 2.0f64.powi(-24), std::f64::consts::PI, 1e300] {
            let s = fmt_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let mut t = Table::new("demo", &["eps", "value"]);
        t.push(vec![0.5, 1.0]);
        let text = csv_of(&t);
        assert!(text.starts_with("eps,value\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
