//! JSON matrix container: `{"rows": r, "cols": c, "entries": [[[re, im], …], …]}`.
//!
//! Floats are written in shortest round-trip form, so a write-then-read
//! cycle reproduces every finite `f64` bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, is_finite, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixContainer {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixContainer {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixContainer {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows || self.entries.iter().any(|row| row.len() != self.cols) {
            return Err(Error::Parse(format!(
                "declared {}×{} but entry array has a different shape",
                self.rows, self.cols
            )));
        }
        let m = CMatrix::from_fn(self.rows, self.cols, |r, k| {
            let [re, im] = self.entries[r][k];
            c(re, im)
        });
        if !is_finite(&m) {
            return Err(Error::Parse("matrix contains NaN or infinite entries".into()));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = fs::read_to_string(path)?;
    MatrixContainer::from_json(&text)?.to_matrix()
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    fs::write(path, MatrixContainer::from_matrix(m).to_json()?)?;
    Ok(())
}
