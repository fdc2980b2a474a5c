//! Plain numeric CSV: no header, comma separated, one sample per row.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back is bit-identical to the value written.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                path: path.into(),
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: lineno + 1,
                    msg: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.into(),
            line: 0,
            msg: "no data rows".into(),
        });
    }
    Matrix::from_rows(&rows)
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.cols() != 1 {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: format!("expected one value per line, found {}", m.cols()),
        });
    }
    Ok(m.as_slice().to_vec())
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn vector_to_csv(v: &[f64]) -> String {
    let mut s = String::new();
    for x in v {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

/// Writes the whole file at once through a sibling temp file, so a failure
/// never leaves partial output behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    let res = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}
