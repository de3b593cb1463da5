//! Immutable samples: a feature matrix plus ±1 labels, standing in for the
//! empirical measure that puts mass 1/N on each row.

use crate::error::{Error, Result};

/// An N×d feature matrix with hard ±1 labels. Immutable once built, so it can
/// be shared freely across threads.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f64>, // row-major, n * d entries
    labels: Vec<f64>,   // exactly -1.0 or +1.0
    n: usize,
    d: usize,
}

impl Dataset {
    /// Build from a flat row-major feature buffer.
    pub fn new(features: Vec<f64>, n: usize, d: usize, labels: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.len() != n * d {
            return Err(Error::LengthMismatch { left: features.len(), right: n * d });
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch { left: labels.len(), right: n });
        }
        for (i, row) in features.chunks(d).enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFiniteFeature { row: i, column: j });
                }
            }
        }
        for (i, &y) in labels.iter().enumerate() {
            if y != 1.0 && y != -1.0 {
                return Err(Error::BadLabel { row: i, value: y });
            }
        }
        Ok(Dataset { features, labels, n, d })
    }

    /// Build from one `Vec` per row.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRow { row: i, expected: d, got: r.len() });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Dataset::new(flat, rows.len(), d, labels.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// New dataset holding the given rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(features, indices.len(), self.d, labels)
    }
}
