//! Run reports: a TOML summary echoing the resolved config plus CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use toml::{Table as TomlTable, Value};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits round-trip every double
            Cell::Real(v) => format!("{v:.16e}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub passed: bool,
    pub result: TomlTable,
    pub tables: Vec<CsvTable>,
}

impl Report {
    pub fn new(passed: bool) -> Self {
        Self { passed, result: TomlTable::new(), tables: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.result.insert(key.to_string(), value.into());
    }

    pub fn set_complex(&mut self, key: &str, z: Complex64) {
        let mut t = TomlTable::new();
        t.insert("re".into(), z.re.into());
        t.insert("im".into(), z.im.into());
        self.result.insert(key.to_string(), Value::Table(t));
    }

    pub fn set_count(&mut self, key: &str, n: usize) {
        self.set(key, n as i64);
    }
}

/// Renders the summary and, when an output directory is configured, writes
/// it next to the CSV tables.
pub fn emit(config: &RunConfig, report: &Report) -> Result<String, CliError> {
    let command = config.command.expect("resolved command").name();
    let mut doc = TomlTable::new();
    doc.insert("status".into(), Value::String(if report.passed { "pass" } else { "fail" }.into()));
    let echoed = Value::try_from(config).map_err(|e| CliError::Io(format!("cannot render config: {e}")))?;
    doc.insert("config".into(), echoed);
    doc.insert("result".into(), Value::Table(report.result.clone()));
    let files: Vec<String> = report.tables.iter().map(|t| format!("{command}_{}.csv", t.name)).collect();
    if config.output.is_some() && !files.is_empty() {
        doc.insert("tables".into(), Value::Array(files.iter().cloned().map(Value::String).collect()));
    }
    let mut summary = String::new();
    write!(summary, "{}", toml::to_string(&doc).map_err(|e| CliError::Io(e.to_string()))?).expect("string write");
    if let Some(dir) = &config.output {
        write_file(dir, &format!("{command}.toml"), &summary)?;
        for (t, name) in report.tables.iter().zip(&files) {
            write_file(dir, name, &t.render())?;
        }
    }
    Ok(summary)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
