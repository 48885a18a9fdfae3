use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Result, RunError};

/// One CSV cell. Floats are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

/// A named table written as `<name>.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// CSV text: header row then one line per row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| RunError::io(self.file_name(), e);
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::io(self.file_name(), e))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// `[a-z0-9_-]` version of a model label for file names.
pub fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| match c {
            'a'..='z' | '0'..='9' | '-' => c,
            'A'..='Z' => c.to_ascii_lowercase(),
            '.' => 'p',
            _ => '_',
        })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

#[derive(Serialize)]
struct OutputEntry<'a> {
    file: String,
    columns: &'a [String],
    rows: usize,
}

#[derive(Serialize)]
struct Metadata<'a> {
    program: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    workers: usize,
    wall_time_seconds: f64,
    outputs: Vec<OutputEntry<'a>>,
}

/// Writes every table plus `metadata.json` into `dir`; returns the paths.
pub fn write_all(
    dir: &Path,
    tables: &[ResultTable],
    config: &ExperimentConfig,
    workers: usize,
    wall_time_seconds: f64,
) -> Result<Vec<PathBuf>> {
    // render first so a failure leaves nothing half-written
    let rendered = tables
        .iter()
        .map(|t| Ok((dir.join(t.file_name()), t.to_csv()?)))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut paths = Vec::new();
    for (path, body) in rendered {
        std::fs::write(&path, body).map_err(|e| RunError::io(&path, e))?;
        paths.push(path);
    }
    let meta = Metadata {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        workers,
        wall_time_seconds,
        outputs: tables
            .iter()
            .map(|t| OutputEntry {
                file: t.file_name(),
                columns: &t.columns,
                rows: t.rows.len(),
            })
            .collect(),
    };
    let path = dir.join("metadata.json");
    let json = serde_json::to_string_pretty(&meta).map_err(|e| RunError::io(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| RunError::io(&path, e))?;
    paths.push(path);
    Ok(paths)
}
