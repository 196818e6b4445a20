//! File formats: model and `φ` JSON, CSV tables and dense complex matrices.
//!
//! Floats are written with 17 significant digits so every value round-trips.
//! Complex matrices are stored row-major, one matrix row per line, as
//! `re,im` pairs without a header.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::araki_woods::RepSpec;
use crate::error::{Error, Result};
use crate::multipliers::PhiSpec;

/// Round-trip representation of a float.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Like [`format_float`] but leaves the field empty for `None`.
pub fn format_optional(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("malformed CSV: {other:?}")),
    }
}

/// Writes a table with a header row, comma separator and LF line endings.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header).map_err(csv_error)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch { expected: header.len(), got: row.len() });
        }
        out.write_record(row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_matrix_csv<W: Write>(w: W, m: &DMatrix<C64>) -> Result<()> {
    let mut out =
        csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().flat_map(|z| [format_float(z.re), format_float(z.im)]).collect();
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DMatrix<C64>> {
    let mut input = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (line, record) in input.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!("row {line} has an odd number of fields")));
        }
        let mut values = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::InvalidInput(format!("row {line}: cannot parse {field:?} as a float")))?;
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("row {line}: non-finite entry")));
            }
            values.push(v);
        }
        rows.push(values.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<C64>> {
    read_matrix_csv(fs::File::open(path)?)
}

pub fn load_model(path: &Path) -> Result<RepSpec> {
    RepSpec::from_json(&fs::read_to_string(path)?)
}

/// Reads `φ` from inline JSON (anything starting with `{`) or from a file.
pub fn load_phi(arg: &str) -> Result<PhiSpec> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        PhiSpec::from_json(trimmed)
    } else {
        PhiSpec::from_json(&fs::read_to_string(arg)?)
    }
}
