//! Row-major JSON and CSV encodings for dense matrices.
//!
//! Floats are written in shortest round-trip form so a write/read cycle
//! reproduces every binary64 value exactly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `{"rows": r, "cols": c, "data": [row-major values]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.rows * self.cols != self.data.len() {
            return Err(Error::Parse(format!(
                "matrix declares {}x{} but carries {} values",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

impl From<&DMatrix<f64>> for MatrixJson {
    fn from(m: &DMatrix<f64>) -> Self {
        let data = m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect();
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> Result<String> {
    Ok(serde_json::to_string(&MatrixJson::from(m))?)
}

pub fn matrix_from_json(text: &str) -> Result<DMatrix<f64>> {
    serde_json::from_str::<MatrixJson>(text)?.to_matrix()
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses comma-separated rows; blank lines are skipped. Errors name the
/// offending line and column.
pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, field)| {
                field.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}, column {}: {e}", lineno + 1, col + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

/// Parses `"1,2.5,-3"` into a vector.
pub fn vector_from_list(text: &str) -> Result<DVector<f64>> {
    let vals = text
        .split(',')
        .enumerate()
        .map(|(i, f)| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("entry {}: {e}", i + 1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_layout_is_row_major() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(
            matrix_to_json(&m).unwrap(),
            r#"{"rows":2,"cols":3,"data":[1.0,2.0,3.0,4.0,5.0,6.0]}"#
        );
    }

    #[test]
    fn json_size_mismatch_is_rejected() {
        assert!(matrix_from_json(r#"{"rows":2,"cols":2,"data":[1,2,3]}"#).is_err());
    }

    #[test]
    fn csv_reports_location() {
        let err = matrix_from_csv("1,2\n3,x\n").unwrap_err().to_string();
        assert!(err.contains("line 2, column 2"), "{err}");
        assert!(matrix_from_csv("1,2\n3\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trips_are_bit_exact(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 16),
        ) {
            let m = DMatrix::from_fn(rows, cols, |i, j| seed[(i * cols + j) % seed.len()]);
            let via_json = matrix_from_json(&matrix_to_json(&m).unwrap()).unwrap();
            let via_csv = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
            for (a, b) in m.iter().zip(via_json.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in m.iter().zip(via_csv.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
