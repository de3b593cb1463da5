use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("label at row {row} is {value}, expected -1 or +1")]
    BadLabel { row: usize, value: f64 },

    #[error("feature at row {row}, column {column} is not finite")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("input has {got} features, expected {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("exponential loss overflows at index {index}: margin {margin} < -700")]
    MarginOutOfRange { index: usize, margin: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("weight at index {index} is negative: {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1 within {tolerance}")]
    WeightSum { sum: f64, tolerance: f64 },

    #[error("beta = {beta} is outside the domain (-inf, {bound})")]
    BetaOutOfDomain { beta: f64, bound: f64 },

    #[error("failed to bracket the dual root after {attempts} expansions (loss spread {spread})")]
    BracketFailure { attempts: usize, spread: f64 },

    #[error("root finder did not converge within {max_iters} iterations")]
    NoConvergence { max_iters: usize },

    #[error("need at least {needed} rows to fit, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line search failed: {0}")]
    LineSearch(String),

    #[error("training failed at iteration {iteration}: {source}")]
    Training {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset contains a single class; boosting needs both labels")]
    DegenerateLabels,

    #[error("quantile level {0} must lie strictly inside (0, 1)")]
    BadQuantileLevel(f64),

    #[error("EPL undefined at this F: zero is not interior to the moment hull")]
    EplInfeasible,

    #[error("non-numeric cell at row {row}, column {column}: {cell:?}")]
    NonNumericCell { row: usize, column: usize, cell: String },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("file has no data rows")]
    EmptyFile,

    #[error("train size {train_size} out of range for {n} rows")]
    BadSplit { train_size: usize, n: usize },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
