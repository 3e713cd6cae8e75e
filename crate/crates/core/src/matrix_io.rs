//! CSV and JSON containers for sensing matrices.
//!
//! CSV layout:
//!
//! ```text
//! n,N,spec,seed,algorithm_id
//! 2,3,custom(hand),0,xoshiro256pp-splitmix64
//! 1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0
//! 0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0
//! ```
//!
//! Entries carry 17 significant digits, which round-trips every `f64`.
//! The JSON container holds the same fields with `entries` as a list of rows.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, SensingMatrix};
use crate::error::{Error, Result};
use crate::randsrc::ALGORITHM_ID;

pub const CSV_HEADER: &str = "n,N,spec,seed,algorithm_id";

pub fn to_csv(a: &SensingMatrix) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(&format!("{},{},{},{},{}\n", a.rows(), a.cols(), a.spec, a.seed, ALGORITHM_ID));
    for r in 0..a.rows() {
        let row: Vec<String> = (0..a.cols())
            .map(|c| format!("{:.16e}", a.entries()[(r, c)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<SensingMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse(format!("expected header {CSV_HEADER:?}, got {header:?}")));
    }
    let meta_line = lines.next().ok_or_else(|| Error::Parse("missing metadata row".into()))?;
    let meta: Vec<&str> = meta_line.split(',').map(str::trim).collect();
    if meta.len() != 5 {
        return Err(Error::Parse(format!("metadata row needs 5 fields, got {}", meta.len())));
    }
    let int = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {s:?}")));
    let rows = int(meta[0])? as usize;
    let cols = int(meta[1])? as usize;
    let spec: EnsembleSpec = meta[2].parse()?;
    let seed = int(meta[3])?;
    let mut data = Vec::with_capacity(rows * cols);
    for (k, line) in lines.enumerate() {
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value {v:?} in row {k}"))))
            .collect::<Result<_>>()?;
        if values.len() != cols {
            return Err(Error::Parse(format!("row {k} has {} values, expected {cols}", values.len())));
        }
        data.extend(values);
    }
    if data.len() != rows * cols {
        return Err(Error::Parse(format!("expected {rows} data rows")));
    }
    SensingMatrix::new(DMatrix::from_row_slice(rows, cols, &data), spec, seed)
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    spec: EnsembleSpec,
    seed: u64,
    algorithm_id: String,
    entries: Vec<Vec<f64>>,
}

pub fn to_json(a: &SensingMatrix) -> Result<String> {
    let doc = MatrixJson {
        n: a.rows(),
        big_n: a.cols(),
        spec: a.spec.clone(),
        seed: a.seed,
        algorithm_id: ALGORITHM_ID.to_string(),
        entries: a.entries().row_iter().map(|r| r.iter().copied().collect()).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn from_json(text: &str) -> Result<SensingMatrix> {
    let doc: MatrixJson = serde_json::from_str(text)?;
    if doc.entries.len() != doc.n || doc.entries.iter().any(|r| r.len() != doc.big_n) {
        return Err(Error::Parse("entries do not match n x N".into()));
    }
    let m = DMatrix::from_fn(doc.n, doc.big_n, |r, c| doc.entries[r][c]);
    SensingMatrix::new(m, doc.spec, doc.seed)
}

/// Read a matrix, choosing the format from the extension (`.json` or CSV).
pub fn read_matrix(path: &Path) -> Result<SensingMatrix> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        from_json(&text)
    } else {
        from_csv(&text)
    }
}

pub fn write_matrix(a: &SensingMatrix, path: &Path) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        to_json(a)?
    } else {
        to_csv(a)
    };
    std::fs::write(path, text)?;
    Ok(())
}
