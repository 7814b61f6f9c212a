//! Row-major `[[...], ...]` <-> `DMatrix` conversion for the JSON formats.

use nalgebra::DMatrix;

use crate::error::{KahlerError, Result};

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(KahlerError::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(KahlerError::NonFinite);
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Same as [`from_rows`] but requires a square `n x n` shape.
pub fn square_from_rows(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    let m = from_rows(rows)?;
    if m.nrows() != n {
        return Err(KahlerError::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    if m.ncols() != n {
        return Err(KahlerError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m)
}
