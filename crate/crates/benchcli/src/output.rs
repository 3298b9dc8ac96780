//! CSV/JSON text and atomic file emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::BenchError;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Comma-separated table with a header row.
#[derive(Debug, Clone)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.header.len());
        self.rows.push(values.iter().map(|v| fmt_num(*v)).collect());
    }

    /// Row whose leading cells are labels.
    pub fn labelled_row(&mut self, labels: &[&str], values: &[f64]) {
        debug_assert_eq!(labels.len() + values.len(), self.header.len());
        let mut cells: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        cells.extend(values.iter().map(|v| fmt_num(*v)));
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Pretty JSON. Struct fields keep declaration order and maps are sorted,
/// so the key order is stable.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, BenchError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| BenchError::Numerical(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// One output file.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Artifact {
            name: name.into(),
            contents: contents.into(),
        }
    }
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory and a rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, BenchError> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| BenchError::Io(e.error))?;
    Ok(path)
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, BenchError> {
    artifacts.iter().map(|a| write_atomic(dir, &a.name, &a.contents)).collect()
}
