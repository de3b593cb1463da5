use crate::model_file::{read_model, write_model, ModelFile};
use crate::{CliError, DataArgs};
use drboost::{
    load_csv, select_delta, split, train_adaboost, CalibrationSpec, Dataset, DeltaPolicy,
    Ensemble, LineSearchConfig, LineSearchKind, MarginLoss, Schema, SplitMix64, SplitSpec,
    TrainConfig, TrainTrace, TreeConfig,
};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn schema_of(args: &DataArgs) -> Result<Schema, CliError> {
    match args.schema.as_str() {
        "uci" | "uci_credit" => Ok(Schema::UciCredit { skip_rows: args.skip_rows }),
        "generic" => Ok(Schema::Generic {
            label_column: args.label_column.clone(),
            positive_value: args.positive_value.clone(),
        }),
        other => Err(CliError::Data(format!("unknown schema {other:?} (use uci or generic)"))),
    }
}

fn load(args: &DataArgs) -> Result<Dataset, CliError> {
    Ok(load_csv(&args.data, &schema_of(args)?)?)
}

fn parse_delta(
    raw: &str,
    confidence: f64,
    dim_t: usize,
    n: usize,
) -> Result<(DeltaPolicy, f64), CliError> {
    if raw == "auto" {
        let spec = CalibrationSpec::new(confidence, dim_t, n)?;
        let value = select_delta(&spec)?;
        Ok((DeltaPolicy::Calibrated { confidence, dim: dim_t }, value))
    } else {
        let value: f64 = raw
            .parse()
            .map_err(|_| CliError::Data(format!("--delta must be a number or `auto`, got {raw:?}")))?;
        Ok((DeltaPolicy::Fixed(value), value))
    }
}

fn line_search_kind(raw: &str) -> Result<LineSearchKind, CliError> {
    match raw {
        "exact" | "exact_robust" => Ok(LineSearchKind::ExactRobust),
        "fixed" | "fixed_weights" => Ok(LineSearchKind::FixedWeights),
        other => Err(CliError::Data(format!("unknown line search {other:?}"))),
    }
}

pub struct TrainArgs {
    pub data: DataArgs,
    pub loss: String,
    pub delta: String,
    pub confidence: f64,
    pub dim_t: Option<usize>,
    pub depth: usize,
    pub min_leaf: usize,
    pub iters: usize,
    pub line_search: String,
    pub seed: u64,
    pub out: PathBuf,
    pub trace: Option<PathBuf>,
}

pub fn train_command_output(args: &TrainArgs) -> Result<(ModelFile, TrainTrace, f64), CliError> {
    let dataset = load(&args.data)?;
    let loss = MarginLoss::parse(&args.loss)?;
    let dim_t = args.dim_t.unwrap_or(args.iters.max(1));
    let (delta, delta_value) = parse_delta(&args.delta, args.confidence, dim_t, dataset.n())?;
    let config = TrainConfig {
        delta,
        loss,
        tree: TreeConfig::new(args.depth, args.min_leaf)?,
        max_iters: args.iters,
        line_search: LineSearchConfig {
            kind: line_search_kind(&args.line_search)?,
            ..LineSearchConfig::default()
        },
        seed: args.seed,
        ..TrainConfig::default()
    };
    let (ensemble, trace) = drboost::train(&dataset, &config)?;
    let model = ModelFile { loss, features: dataset.d(), ensemble };
    Ok((model, trace, delta_value))
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let (model, trace, delta_value) = train_command_output(&args)?;
    write_model(&args.out, &model)?;
    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.trace.tsv", args.out.display())));
    std::fs::write(&trace_path, render_trace(&trace, delta_value, model.loss))?;
    eprintln!(
        "trained {} terms (delta = {delta_value}), model -> {}, trace -> {}",
        model.ensemble.len(),
        args.out.display(),
        trace_path.display()
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

pub fn render_trace(trace: &TrainTrace, delta: f64, loss: MarginLoss) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# drboost-trace v1");
    let _ = writeln!(out, "# delta {delta}");
    let _ = writeln!(out, "# loss {}", loss.name());
    let _ = writeln!(out, "# seed {}", trace.seed);
    let _ = writeln!(
        out,
        "iter\trobust_loss\tempirical_loss\tachieved_kl\tbeta_star\talpha\tlearner"
    );
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.iteration,
            r.robust_loss,
            r.empirical_loss,
            r.achieved_kl,
            fmt_opt(r.beta_star),
            fmt_opt(r.step_size),
            r.learner.as_deref().unwrap_or("-"),
        );
    }
    out
}

fn check_arity(model: &ModelFile, data: &Dataset) -> Result<(), CliError> {
    if model.features != data.d() {
        return Err(CliError::Data(format!(
            "model expects {} features but the data has {}",
            model.features,
            data.d()
        )));
    }
    Ok(())
}

pub fn predict(data_args: &DataArgs, model_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let dataset = load(data_args)?;
    let model = read_model(model_path)?;
    check_arity(&model, &dataset)?;
    let mut lines = String::new();
    for i in 0..dataset.n() {
        let label = model.ensemble.predict_label(dataset.row(i))?;
        let _ = writeln!(lines, "{}", label as i64);
    }
    match out {
        Some(path) => std::fs::write(path, lines)?,
        None => print!("{lines}"),
    }
    Ok(())
}

/// The four Table-1 metrics. The conditional-probability definitions follow
/// the source table verbatim, which treats the -1 class as "positive":
/// `true_positive_rate` conditions on true = -1 and `false_negative_rate` on
/// true = +1.
#[derive(Debug, Clone, Copy, Default)]
pub struct Metrics {
    pub accuracy: f64,
    pub false_negative_rate: f64,
    pub true_positive_rate: f64,
    pub avg_exponential_loss: f64,
}

pub fn compute_metrics(ensemble: &Ensemble, data: &Dataset) -> Result<Metrics, CliError> {
    let n = data.n();
    let mut correct = 0usize;
    let mut true_pos = 0usize; // true label +1
    let mut pred_pos_given_pos = 0usize;
    let mut true_neg = 0usize;
    let mut pred_neg_given_neg = 0usize;
    let mut exp_loss = 0.0;
    for i in 0..n {
        let score = ensemble.evaluate(data.row(i))?;
        let pred = if score >= 0.0 { 1.0 } else { -1.0 };
        let y = data.label(i);
        if pred == y {
            correct += 1;
        }
        if y == 1.0 {
            true_pos += 1;
            if pred == 1.0 {
                pred_pos_given_pos += 1;
            }
        } else {
            true_neg += 1;
            if pred == -1.0 {
                pred_neg_given_neg += 1;
            }
        }
        exp_loss += (-y * score).exp();
    }
    Ok(Metrics {
        accuracy: correct as f64 / n as f64,
        false_negative_rate: pred_pos_given_pos as f64 / true_pos as f64,
        true_positive_rate: pred_neg_given_neg as f64 / true_neg as f64,
        avg_exponential_loss: exp_loss / n as f64,
    })
}

pub fn evaluate(data_args: &DataArgs, model_path: &Path) -> Result<(), CliError> {
    let dataset = load(data_args)?;
    let model = read_model(model_path)?;
    check_arity(&model, &dataset)?;
    let m = compute_metrics(&model.ensemble, &dataset)?;
    println!("accuracy={}", m.accuracy);
    println!("false_negative_rate={}", m.false_negative_rate);
    println!("true_positive_rate={}", m.true_positive_rate);
    println!("avg_exponential_loss={}", m.avg_exponential_loss);
    println!("n={}", dataset.n());
    println!();
    println!("metric                          value");
    println!("accuracy  P(pred=true)          {:.6}", m.accuracy);
    println!("false neg P(pred=+1|true=+1)    {:.6}", m.false_negative_rate);
    println!("true pos  P(pred=-1|true=-1)    {:.6}", m.true_positive_rate);
    println!("avg exponential loss            {:.6}", m.avg_exponential_loss);
    Ok(())
}

pub fn calibrate_delta(dim_t: usize, confidence: f64, n: usize) -> Result<(), CliError> {
    let spec = CalibrationSpec::new(confidence, dim_t, n)?;
    let delta = select_delta(&spec)?;
    println!("delta={delta}");
    Ok(())
}

pub struct BenchmarkArgs {
    pub data: DataArgs,
    pub reps: usize,
    pub train_size: usize,
    pub depth: usize,
    pub min_leaf: usize,
    pub iters: usize,
    pub delta: String,
    pub confidence: f64,
    pub dim_t: usize,
    pub seed: u64,
}

struct RepResult {
    dro_train: Metrics,
    dro_test: Metrics,
    ada_train: Metrics,
    ada_test: Metrics,
}

pub fn benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Data("--reps must be >= 1".into()));
    }
    let dataset = load(&args.data)?;
    let tree = TreeConfig::new(args.depth, args.min_leaf)?;
    let (delta_policy, delta_value) =
        parse_delta(&args.delta, args.confidence, args.dim_t, args.train_size)?;

    let mut seed_stream = SplitMix64::new(args.seed);
    let rep_seeds: Vec<u64> = (0..args.reps).map(|_| seed_stream.next_u64()).collect();

    let results: Result<Vec<RepResult>, CliError> = rep_seeds
        .par_iter()
        .map(|&rep_seed| {
            let spec = SplitSpec { train_size: args.train_size, seed: rep_seed, shuffle: true };
            let (train_set, test_set) = split(&dataset, &spec)?;

            let config = TrainConfig {
                delta: delta_policy,
                loss: MarginLoss::Exponential,
                tree,
                max_iters: args.iters,
                seed: rep_seed,
                ..TrainConfig::default()
            };
            let (dro, _) = drboost::train(&train_set, &config)?;
            let ada = train_adaboost(&train_set, &tree, args.iters)?.ensemble;

            Ok(RepResult {
                dro_train: compute_metrics(&dro, &train_set)?,
                dro_test: compute_metrics(&dro, &test_set)?,
                ada_train: compute_metrics(&ada, &train_set)?,
                ada_test: compute_metrics(&ada, &test_set)?,
            })
        })
        .collect();
    let results = results?;

    println!("# benchmark reps={} train_size={} delta={delta_value}", args.reps, args.train_size);
    for (r, res) in results.iter().enumerate() {
        println!(
            "rep={r} dro_test_exp_loss={} ada_test_exp_loss={} dro_test_acc={} ada_test_acc={}",
            res.dro_test.avg_exponential_loss,
            res.ada_test.avg_exponential_loss,
            res.dro_test.accuracy,
            res.ada_test.accuracy
        );
    }

    let table: [(&str, fn(&Metrics) -> f64); 4] = [
        ("accuracy", |m| m.accuracy),
        ("false_negative_rate", |m| m.false_negative_rate),
        ("true_positive_rate", |m| m.true_positive_rate),
        ("avg_exponential_loss", |m| m.avg_exponential_loss),
    ];
    println!();
    println!(
        "{:<22} {:>22} {:>22} {:>22} {:>22}",
        "metric", "ada train", "dro train", "ada test", "dro test"
    );
    for (name, get) in table {
        let cols = [
            summarize(results.iter().map(|r| get(&r.ada_train))),
            summarize(results.iter().map(|r| get(&r.dro_train))),
            summarize(results.iter().map(|r| get(&r.ada_test))),
            summarize(results.iter().map(|r| get(&r.dro_test))),
        ];
        println!(
            "{:<22} {:>22} {:>22} {:>22} {:>22}",
            name, cols[0], cols[1], cols[2], cols[3]
        );
        for (col, tag) in ["ada_train", "dro_train", "ada_test", "dro_test"].iter().enumerate() {
            let (mean, sd) = mean_sd(match col {
                0 => results.iter().map(|r| get(&r.ada_train)).collect::<Vec<_>>(),
                1 => results.iter().map(|r| get(&r.dro_train)).collect(),
                2 => results.iter().map(|r| get(&r.ada_test)).collect(),
                _ => results.iter().map(|r| get(&r.dro_test)).collect(),
            });
            println!("{name}_{tag}_mean={mean}");
            println!("{name}_{tag}_sd={sd}");
        }
    }
    Ok(())
}

fn mean_sd(values: Vec<f64>) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(values: impl Iterator<Item = f64>) -> String {
    let (mean, sd) = mean_sd(values.collect());
    format!("{mean:.4} ± {sd:.4}")
}
