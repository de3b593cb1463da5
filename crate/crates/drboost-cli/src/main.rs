mod commands;
mod model_file;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit code for bad inputs (files, schemas, data contents).
const EXIT_DATA: u8 = 3;
/// Exit code for numerical/solver failures.
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(
    name = "drboost",
    about = "Distributionally robust boosting over KL uncertainty balls",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, clap::Args)]
struct DataArgs {
    /// CSV file to read.
    #[arg(long)]
    data: PathBuf,
    /// Schema: `uci` (credit-default layout) or `generic`.
    #[arg(long, default_value = "generic")]
    schema: String,
    /// Header rows to skip (uci schema; the raw UCI export needs 2).
    #[arg(long, default_value_t = 1)]
    skip_rows: usize,
    /// Label column name (generic schema).
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Label value mapped to +1 (generic schema).
    #[arg(long, default_value = "1")]
    positive_value: String,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a robust ensemble and write the model plus an iteration trace.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// Margin loss: `exp` or `logistic`.
        #[arg(long, default_value = "exp")]
        loss: String,
        /// KL radius: a number, or `auto` for chi-square calibration.
        #[arg(long, default_value = "auto")]
        delta: String,
        /// Confidence level for `--delta auto`.
        #[arg(long, default_value_t = 0.9)]
        confidence: f64,
        /// Functional-space dimension T for `--delta auto`; defaults to
        /// the iteration budget.
        #[arg(long = "dim-T")]
        dim_t: Option<usize>,
        /// Tree depth of the weak learners.
        #[arg(long, default_value_t = 5)]
        depth: usize,
        /// Minimum rows per leaf.
        #[arg(long, default_value_t = 1)]
        min_leaf: usize,
        /// Boosting iterations.
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Line search: `exact` (re-solve the worst case) or `fixed`.
        #[arg(long, default_value = "exact")]
        line_search: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model output path.
        #[arg(long)]
        out: PathBuf,
        /// Trace output path; defaults to `<out>.trace.tsv`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Predict ±1 labels for a dataset.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report accuracy, the Table-1 rates, and average exponential loss.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the calibrated KL radius chi2_quantile(T, confidence) / (2N).
    CalibrateDelta {
        #[arg(long = "dim-T")]
        dim_t: usize,
        #[arg(long, default_value_t = 0.9)]
        confidence: f64,
        #[arg(long)]
        n: usize,
    },
    /// Repeated split/train/evaluate comparison of robust boosting vs
    /// AdaBoost.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 3000)]
        train_size: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        min_leaf: usize,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// KL radius: a number or `auto`.
        #[arg(long, default_value = "auto")]
        delta: String,
        #[arg(long, default_value_t = 0.9)]
        confidence: f64,
        #[arg(long = "dim-T", default_value_t = 30)]
        dim_t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    // DRBOOST_THREADS caps the rayon pool used by the split search and the
    // benchmark repetitions.
    if let Ok(threads) = std::env::var("DRBOOST_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            data,
            loss,
            delta,
            confidence,
            dim_t,
            depth,
            min_leaf,
            iters,
            line_search,
            seed,
            out,
            trace,
        } => commands::train(commands::TrainArgs {
            data,
            loss,
            delta,
            confidence,
            dim_t,
            depth,
            min_leaf,
            iters,
            line_search,
            seed,
            out,
            trace,
        }),
        Command::Predict { data, model, out } => commands::predict(&data, &model, out.as_deref()),
        Command::Evaluate { data, model } => commands::evaluate(&data, &model),
        Command::CalibrateDelta { dim_t, confidence, n } => {
            commands::calibrate_delta(dim_t, confidence, n)
        }
        Command::Benchmark {
            data,
            reps,
            train_size,
            depth,
            min_leaf,
            iters,
            delta,
            confidence,
            dim_t,
            seed,
        } => commands::benchmark(commands::BenchmarkArgs {
            data,
            reps,
            train_size,
            depth,
            min_leaf,
            iters,
            delta,
            confidence,
            dim_t,
            seed,
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { EXIT_DATA } else { EXIT_SOLVER })
        }
    }
}

/// CLI-level error carrying the exit-code category.
#[derive(Debug)]
pub enum CliError {
    Data(String),
    Solver(String),
}

impl CliError {
    fn is_data_error(&self) -> bool {
        matches!(self, CliError::Data(_))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Data(m) | CliError::Solver(m) => write!(f, "{m}"),
        }
    }
}

impl From<drboost::Error> for CliError {
    fn from(e: drboost::Error) -> Self {
        use drboost::Error::*;
        match &e {
            EmptyDataset | BadLabel { .. } | NonFiniteFeature { .. } | RaggedRow { .. }
            | NonNumericCell { .. } | MissingLabelColumn(_) | EmptyFile | BadSplit { .. }
            | Csv(_) | Io(_) | ArityMismatch { .. } | DegenerateLabels => {
                CliError::Data(e.to_string())
            }
            Training { source, .. } => {
                // Data problems stay data problems even when surfaced
                // mid-training.
                match **source {
                    TooFewRows { .. } | ArityMismatch { .. } => CliError::Data(e.to_string()),
                    _ => CliError::Solver(e.to_string()),
                }
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
