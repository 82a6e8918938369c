//! File emission. CSV headers carry units in brackets; JSON objects have
//! sorted keys, so identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// Where a command writes its files; `None` means stdout summary only.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Sink { dir })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_deref().map(|d| d.join(name))
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let Some(path) = self.path(name) else {
            return Ok(());
        };
        write_csv(&path, header, rows)
    }

    /// Writes `name` (if there is a directory) and prints the summary.
    pub fn summary(&self, name: &str, value: &Value) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("JSON values always serialize") + "\n";
        if let Some(path) = self.path(name) {
            fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
        }
        print!("{text}");
        Ok(())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(&row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Shortest round-trip decimal; `NaN` stays literal.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0u64), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}
