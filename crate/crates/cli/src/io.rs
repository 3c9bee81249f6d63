//! Headerless CSV and JSON helpers.
//!
//! Reals are written with 17 significant digits so every value round-trips.

use std::fs::{self, File};
use std::path::Path;

use serde::Serialize;
use sqrtlasso_core::DenseMatrix;

use crate::error::{CliError, CliResult};

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn open(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().has_headers(false).from_reader(file))
}

/// Rows of reals; every row must have the same length.
pub fn read_rows(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, record) in open(path)?.records().enumerate() {
        let record = record.map_err(|e| {
            let msg = format!("{}: {e}", path.display());
            if e.is_io_error() {
                CliError::Io(msg)
            } else {
                CliError::Usage(msg)
            }
        })?;
        let row = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("{} line {}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{} is empty", path.display())));
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> CliResult<DenseMatrix> {
    let rows = read_rows(path)?;
    DenseMatrix::from_rows(&rows).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Columns of a rows-of-reals file.
pub fn read_columns(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let rows = read_rows(path)?;
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(CliError::Usage(format!("{}: ragged rows", path.display())));
    }
    Ok((0..m).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let mut cols = read_columns(path)?;
    if cols.len() != 1 {
        return Err(CliError::Usage(format!(
            "{}: expected one value per line, found {}",
            path.display(),
            cols.len()
        )));
    }
    Ok(cols.remove(0))
}

pub fn write_rows<I, R>(path: &Path, rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix(path: &Path, x: &DenseMatrix) -> CliResult<()> {
    write_rows(path, (0..x.rows()).map(|i| x.row(i).iter().map(|v| fmt_real(*v)).collect::<Vec<_>>()))
}

pub fn write_vector(path: &Path, v: &[f64]) -> CliResult<()> {
    write_rows(path, v.iter().map(|x| [fmt_real(*x)]))
}

/// CSV with a header row, for traces and sweep tables.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
