//! Headerless CSV for vectors and matrices.
//!
//! Doubles are written in scientific notation with 17 significant digits, so
//! every value round-trips bit-exactly. A vector is a single column.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{QvtError, Result};

/// Format a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn parse(field: &str, row: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|e| QvtError::Parse(format!("row {}: `{field}`: {e}", row + 1)))
}

pub fn write_vector<W: Write>(w: W, v: &[f64]) -> Result<()> {
    let mut wr = writer(w);
    for x in v {
        wr.write_record([fmt_f64(*x)])?;
    }
    wr.flush()?;
    Ok(())
}

/// Write row-major rows.
pub fn write_matrix<W: Write>(w: W, rows: &[Vec<f64>]) -> Result<()> {
    let mut wr = writer(w);
    for r in rows {
        wr.write_record(r.iter().map(|x| fmt_f64(*x)))?;
    }
    wr.flush()?;
    Ok(())
}

/// Read a matrix; every row must have the same width.
pub fn read_matrix<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, rec) in reader(r).records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec.iter().map(|f| parse(f, i)).collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if first != row.len() {
                return Err(QvtError::Parse(format!(
                    "row {} has {} fields, expected {first}",
                    i + 1,
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Read a vector stored either as a single column or as a single row.
pub fn read_vector<R: Read>(r: R) -> Result<Vec<f64>> {
    let m = read_matrix(r)?;
    match m.as_slice() {
        [] => Err(QvtError::EmptyInput),
        [row] => Ok(row.clone()),
        rows if rows[0].len() == 1 => Ok(rows.iter().map(|r| r[0]).collect()),
        _ => Err(QvtError::Parse("expected a single row or column".into())),
    }
}

pub fn read_vector_file(path: &Path) -> Result<Vec<f64>> {
    read_vector(std::fs::File::open(path)?)
}

pub fn read_matrix_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_matrix(std::fs::File::open(path)?)
}

/// Write integer-keyed rows `(key, values...)`, e.g. trajectories.
pub fn write_indexed<W: Write>(w: W, rows: &[(usize, Vec<f64>)]) -> Result<()> {
    let mut wr = writer(w);
    for (k, vals) in rows {
        let mut rec = vec![k.to_string()];
        rec.extend(vals.iter().map(|x| fmt_f64(*x)));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}
