//! CSV emission and the plain-text table view.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::AggregateRow;

pub const RESULTS_FILE: &str = "results.csv";
pub const AGGREGATES_FILE: &str = "aggregates.csv";
pub const ESTIMATION_ERROR_FILE: &str = "estimation_error.csv";
pub const CONFIG_FILE: &str = "config.json";

/// Creates `dir` (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Writes `rows` with a header line to `path`.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| HarnessError::csv(path, e))?;
    }
    writer.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads every record of a CSV file written by [`write_csv`].
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| HarnessError::csv(path, e))
}

/// Writes `text` to `dir/name` and returns the path.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// Aligned text rendering of aggregate rows, one line per group.
pub fn format_table(rows: &[AggregateRow]) -> String {
    let header = ["algo", "oracle", "b", "T", "regret", "CR", "tau"];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.algo.clone(),
                r.oracle.clone(),
                format!("{}", r.b),
                r.horizon.to_string(),
                format!("{:.1} ± {:.1}", r.mean_regret, r.stderr_regret),
                format!("{:.3} ± {:.3}", r.mean_cr, r.stderr_cr),
                format!("{:.1}", r.mean_tau),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for line in &body {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut push_line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i < 2 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    push_line(&header.map(String::from));
    for line in &body {
        push_line(line);
    }
    out
}
