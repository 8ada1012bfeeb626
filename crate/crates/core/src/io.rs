//! CSV ingestion and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so a failure never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

/// Parses a rectangular numeric CSV. A first line with any non-numeric cell
/// is treated as a header and skipped.
pub fn parse_csv(text: &str) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (idx, rec) in reader.records().enumerate() {
        let line = idx + 1;
        let rec = rec.map_err(|e| Error::Input(format!("row {line}: {e}")))?;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if idx == 0 && rec.iter().any(|c| parse_cell(c).is_none()) {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Input(format!(
                    "row {line} has {} fields, expected {w}",
                    rec.len()
                )))
            }
            _ => {}
        }
        for (col, cell) in rec.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| {
                Error::Input(format!("row {line}, column {}: '{cell}' is not a number", col + 1))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::Input("CSV has no data rows".into()))?;
    Array2::from_shape_vec((rows, width), values).map_err(|e| Error::Input(e.to_string()))
}

pub fn read_csv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
        .map_err(|e| match e {
            Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
}

/// Comma-separated text with LF line endings; values use the shortest
/// representation that parses back to the same `f64`.
pub fn format_csv(x: ArrayView2<'_, f64>, header: Option<&[String]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for row in x.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(x: ArrayView2<'_, f64>, header: Option<&[String]>, path: &Path) -> Result<()> {
    write_atomic(path, format_csv(x, header).as_bytes())
}
