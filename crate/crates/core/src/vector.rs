use serde::Serialize;

use crate::error::{Result, WalkError};

/// Inputs may exceed unit norm by this much to absorb rounding in normalization.
pub const NORM_SLACK: f64 = 1e-12;

/// A vector of norm at most one, stored as `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    norm2: f64,
}

impl SparseVector {
    /// Indices must be strictly increasing and values finite.
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        for pair in entries.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(WalkError::InvalidVector(format!(
                    "indices not strictly increasing at {} -> {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(&(i, x)) = entries.iter().find(|(_, x)| !x.is_finite()) {
            return Err(WalkError::InvalidVector(format!(
                "non-finite value {x} at index {i}"
            )));
        }
        let norm2 = entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm2 > 1.0 + NORM_SLACK {
            return Err(WalkError::NormTooLarge { norm: norm2 });
        }
        Ok(Self { entries, norm2 })
    }

    /// Builds from a dense slice, dropping exact zeros.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, x)| x != 0.0)
                .collect(),
        )
    }

    pub fn basis(index: usize) -> Self {
        Self {
            entries: vec![(index, 1.0)],
            norm2: 1.0,
        }
    }

    pub fn zero() -> Self {
        Self {
            entries: Vec::new(),
            norm2: 0.0,
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Multiplies every entry by `c`; the result must still have norm at most one.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.entries.iter().map(|&(i, x)| (i, c * x)).collect())
    }
}
