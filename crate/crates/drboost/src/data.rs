//! CSV ingestion and seeded train/test splitting.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use std::path::Path;

/// How to interpret a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schema {
    /// The UCI credit-default layout: header row(s) to skip, then
    /// ID | 23 numeric predictors | default-payment flag {0, 1}.
    /// The ID column is dropped; label 1 maps to +1 (default), 0 to -1.
    UciCredit { skip_rows: usize },
    /// Header row names the columns; `label_column` holds the class and
    /// `positive_value` maps to +1, every other value to -1. All remaining
    /// columns are numeric features.
    Generic { label_column: String, positive_value: String },
}

impl Schema {
    pub fn uci_credit() -> Self {
        Schema::UciCredit { skip_rows: 1 }
    }
}

const UCI_FEATURES: usize = 23;

/// Load a dataset from a CSV file under the given schema.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;

    let mut records = Vec::new();
    for record in reader.records() {
        records.push(record?);
    }

    match schema {
        Schema::UciCredit { skip_rows } => load_uci(&records, *skip_rows),
        Schema::Generic { label_column, positive_value } => {
            load_generic(&records, label_column, positive_value)
        }
    }
}

fn parse_cell(cell: &str, row: usize, column: usize) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::NonNumericCell {
        row,
        column,
        cell: cell.to_string(),
    })
}

fn load_uci(records: &[csv::StringRecord], skip_rows: usize) -> Result<Dataset> {
    let body = records.get(skip_rows..).unwrap_or(&[]);
    if body.is_empty() {
        return Err(Error::EmptyFile);
    }
    let mut rows = Vec::with_capacity(body.len());
    let mut labels = Vec::with_capacity(body.len());
    for (offset, record) in body.iter().enumerate() {
        let row_no = skip_rows + offset;
        let expected = UCI_FEATURES + 2; // ID + predictors + label
        if record.len() != expected {
            return Err(Error::RaggedRow { row: row_no, expected, got: record.len() });
        }
        let mut features = Vec::with_capacity(UCI_FEATURES);
        for col in 1..=UCI_FEATURES {
            features.push(parse_cell(&record[col], row_no, col)?);
        }
        let label_cell = record[UCI_FEATURES + 1].trim();
        let label = match label_cell {
            "1" => 1.0,
            "0" => -1.0,
            _ => {
                let v = parse_cell(label_cell, row_no, UCI_FEATURES + 1)?;
                return Err(Error::BadLabel { row: row_no, value: v });
            }
        };
        rows.push(features);
        labels.push(label);
    }
    Dataset::from_rows(&rows, &labels)
}

fn load_generic(
    records: &[csv::StringRecord],
    label_column: &str,
    positive_value: &str,
) -> Result<Dataset> {
    let header = records.first().ok_or(Error::EmptyFile)?;
    let label_idx = header
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let width = header.len();
    let body = &records[1..];
    if body.is_empty() {
        return Err(Error::EmptyFile);
    }

    let mut rows = Vec::with_capacity(body.len());
    let mut labels = Vec::with_capacity(body.len());
    for (offset, record) in body.iter().enumerate() {
        let row_no = 1 + offset;
        if record.len() != width {
            return Err(Error::RaggedRow { row: row_no, expected: width, got: record.len() });
        }
        let mut features = Vec::with_capacity(width - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                labels.push(if cell.trim() == positive_value { 1.0 } else { -1.0 });
            } else {
                features.push(parse_cell(cell, row_no, col)?);
            }
        }
        rows.push(features);
    }
    Dataset::from_rows(&rows, &labels)
}

/// Seeded train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_size: usize,
    pub seed: u64,
    pub shuffle: bool,
}

/// splitmix64: a fixed, platform-independent 64-bit stream; splits stay
/// reproducible across toolchains and languages.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, bound) via the widening-multiply reduction.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Deterministic Fisher-Yates permutation from the seed; the first
/// `train_size` permuted rows form the training set.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = data.n();
    if spec.train_size == 0 || spec.train_size >= n {
        return Err(Error::BadSplit { train_size: spec.train_size, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if spec.shuffle {
        let mut rng = SplitMix64::new(spec.seed);
        for i in (1..n).rev() {
            let j = rng.next_below(i as u64 + 1) as usize;
            order.swap(i, j);
        }
    }
    let train = data.subset(&order[..spec.train_size])?;
    let test = data.subset(&order[spec.train_size..])?;
    Ok((train, test))
}
