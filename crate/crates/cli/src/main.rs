//! `pairnet`: generate benchmark data, fit and evaluate PairNets, run model
//! selection and reproduce the benchmark tables.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for
//! runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pairnet_core::baseline::{MlpConfig, Optimizer};
use pairnet_core::datasets::{self, BenchmarkId};
use pairnet_core::selection::{select_model, AlphaMode, EvalMode, SelectionConfig};
use pairnet_core::tables::{self, Table1Config, TABLE2_ALPHAS};
use pairnet_core::trainer::{fit, FitConfig, MinRowsPolicy, DEFAULT_RIDGE};
use pairnet_core::{load_model, save_model, write_atomic, ActivationKind, ActivationScope, Error, Partition};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "pairnet", version, about = "Closed-form PairNet training and benchmarks")]
struct Cli {
    /// Write a JSON run report (echoed command, resolved config, timings,
    /// metrics, outputs) to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark training or test grid as CSV.
    GenData {
        #[arg(long)]
        function: BenchmarkId,
        #[arg(long, value_parser = ["train", "test"])]
        split: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a PairNet on a uniform partition.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Interval counts per input, e.g. "6,6,6".
        #[arg(long)]
        partition: String,
        /// Fusion weights, e.g. "0.1,0.1,0.8"; defaults to equal weights.
        #[arg(long)]
        alphas: Option<String>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        model_out: PathBuf,
        /// Per-subspace fit report; defaults to `<model-out>.report.csv`.
        #[arg(long)]
        fit_report: Option<PathBuf>,
        /// Optional test set to score after fitting.
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Score a saved model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Random-search model selection over partitions and fusion weights.
    Select {
        #[arg(long)]
        data: PathBuf,
        /// Candidates drawn after the initial one.
        #[arg(long, default_value_t = 4)]
        candidates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inclusive interval-count range per input, "MIN-MAX".
        #[arg(long, default_value = "2-6")]
        counts: String,
        /// Fixed fusion weights; random from the simplex when omitted.
        #[arg(long)]
        alphas: Option<String>,
        /// Fraction of rows held out for scoring; 0 scores on the training rows.
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long)]
        leaderboard: Option<PathBuf>,
        /// Add a fit_seconds column to the leaderboard.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Reproduce a benchmark table as CSV.
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        table: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// PairNet candidates after the initial one (table 1).
        #[arg(long, default_value_t = 4)]
        candidates: usize,
        #[command(flatten)]
        mlp: MlpArgs,
    },
}

#[derive(Args)]
struct FitArgs {
    /// `linear`, `sigmoid` or `sigmoid:<steepness>`.
    #[arg(long, default_value = "linear")]
    activation: ActivationKind,
    /// `subspace` or `domain`.
    #[arg(long, default_value = "subspace")]
    scope: ActivationScope,
    /// Ridge relative to the mean Gram diagonal.
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// `fallback-mean` or `error`.
    #[arg(long, default_value = "fallback-mean")]
    min_rows: MinRowsPolicy,
}

#[derive(Args)]
struct MlpArgs {
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 20)]
    layers: usize,
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Momentum coefficient; 0 gives plain SGD.
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 5)]
    mlp_runs: usize,
}

impl MlpArgs {
    fn config(&self, seed: u64) -> MlpConfig {
        MlpConfig {
            hidden: vec![self.width; self.layers],
            epochs: self.epochs,
            learning_rate: self.lr,
            optimizer: if self.momentum == 0.0 {
                Optimizer::Sgd
            } else {
                Optimizer::Momentum { beta: self.momentum }
            },
            batch_size: self.batch,
            seed,
        }
    }
}

/// Error tagged with the exit code it maps to.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let validation = matches!(
            e,
            Error::Config(_) | Error::DimensionMismatch { .. } | Error::DegenerateInterval { .. }
        );
        if validation {
            Failure::Usage(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<Error>() {
            Ok(core) => core.into(),
            Err(e) => Failure::Runtime(e),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure::Usage(anyhow::anyhow!(message))
}

#[derive(Serialize, Default)]
struct RunReport {
    command: Vec<String>,
    config: serde_json::Value,
    timings: serde_json::Map<String, serde_json::Value>,
    metrics: serde_json::Map<String, serde_json::Value>,
    outputs: Vec<PathBuf>,
}

impl RunReport {
    fn timing(&mut self, key: &str, seconds: f64) {
        self.timings.insert(key.into(), seconds.into());
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value.into());
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("invalid {what} entry `{s}`"))))
        .collect()
}

fn parse_counts(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("invalid partition count `{s}`")))
        })
        .collect()
}

fn parse_range(text: &str) -> Result<(usize, usize), Failure> {
    let parsed = text
        .split_once('-')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((lo, hi)) if lo >= 1 && lo <= hi => Ok((lo, hi)),
        _ => Err(usage(format!("invalid count range `{text}`, expected MIN-MAX"))),
    }
}

fn fit_config(alphas: Vec<f64>, args: &FitArgs) -> FitConfig {
    FitConfig::new(alphas)
        .with_activation(args.activation)
        .with_scope(args.scope)
        .with_ridge(args.ridge)
        .with_policy(args.min_rows)
}

fn read_data(path: &Path) -> Result<datasets::Dataset, Failure> {
    Ok(datasets::read_csv(path)?)
}

fn run(cli: Cli, report: &mut RunReport) -> Result<(), Failure> {
    match cli.command {
        Command::GenData { function, split, out } => {
            let data = if split == "train" {
                datasets::gen_train(function)
            } else {
                datasets::gen_test(function)
            };
            datasets::write_csv(&data, &out)?;
            let (lo, hi) = data.target_range().unwrap_or((f64::NAN, f64::NAN));
            println!("{} rows, target range [{lo:.3}, {hi:.3}] -> {}", data.len(), out.display());
            report.config = serde_json::json!({ "function": function, "split": split });
            report.metric("rows", data.len() as f64);
            report.metric("target_min", lo);
            report.metric("target_max", hi);
            report.output(&out);
        }
        Command::Fit {
            data,
            partition,
            alphas,
            fit: fit_args,
            model_out,
            fit_report,
            test,
        } => {
            let counts = parse_counts(&partition)?;
            let alphas = match alphas {
                Some(a) => parse_list(&a, "alpha")?,
                None => pairnet_core::model::equal_alphas(counts.len()),
            };
            let config = fit_config(alphas, &fit_args);
            config.validate(counts.len())?;
            let train = read_data(&data)?;
            if train.dim() != counts.len() {
                return Err(usage(format!(
                    "partition has {} dimensions but the data has {} inputs",
                    counts.len(),
                    train.dim()
                )));
            }
            let partition = Partition::uniform(train.domain(), &counts)?;
            report.config = serde_json::json!({
                "data": data,
                "partition": partition.label(),
                "fit": config,
            });
            let (model, fit_report_data) = fit(&train, &partition, &config)?;
            save_model(&model, &model_out)?;
            let report_path = fit_report.unwrap_or_else(|| model_out.with_extension("report.csv"));
            fit_report_data.write_csv(&report_path)?;
            println!(
                "partition {} ({} subspaces), train MSE {}, fit {:.4}s",
                partition.label(),
                partition.len(),
                fit_report_data.train_mse,
                fit_report_data.fit_seconds
            );
            if fit_report_data.fallbacks() > 0 {
                println!("{} sparse subspaces use the mean-value fallback", fit_report_data.fallbacks());
            }
            report.timing("fit_seconds", fit_report_data.fit_seconds);
            report.metric("train_mse", fit_report_data.train_mse);
            if let Some(test) = test {
                let mse = model.mse(&read_data(&test)?)?;
                println!("test MSE {mse}");
                report.metric("test_mse", mse);
            }
            report.output(&model_out);
            report.output(&report_path);
        }
        Command::Eval { model, data } => {
            let m = load_model(&model)?;
            let d = read_data(&data)?;
            let mse = m.mse(&d)?;
            println!("{} rows, MSE {mse}", d.len());
            report.config = serde_json::json!({ "model": model, "data": data });
            report.metric("mse", mse);
        }
        Command::Select {
            data,
            candidates,
            seed,
            counts,
            alphas,
            holdout,
            fit: fit_args,
            model_out,
            leaderboard,
            timing,
            test,
        } => {
            let range = parse_range(&counts)?;
            let fixed = alphas.map(|a| parse_list(&a, "alpha")).transpose()?;
            let train = read_data(&data)?;
            let mut config = SelectionConfig::new(train.dim(), candidates, range, seed);
            if let Some(a) = fixed {
                config.alpha_mode = AlphaMode::Fixed(a);
            }
            config.eval_mode = if holdout == 0.0 {
                EvalMode::Training
            } else {
                EvalMode::Holdout { fraction: holdout }
            };
            config.activation = fit_args.activation;
            config.scope = fit_args.scope;
            config.ridge = fit_args.ridge;
            config.min_rows_policy = fit_args.min_rows;
            config.validate(train.dim())?;
            report.config = serde_json::json!({ "data": data, "selection": config });

            let start = Instant::now();
            let (model, board) = select_model(&train, &config)?;
            let seconds = start.elapsed().as_secs_f64();
            let best = board.best();
            println!(
                "best of {} candidates: #{} partition {} alphas {:?}, eval MSE {}, {seconds:.4}s",
                board.len(),
                best.candidate,
                best.partition.label(),
                best.alphas,
                best.eval_mse
            );
            let train_mse = model.mse(&train)?;
            println!("train MSE {train_mse}");
            report.timing("select_seconds", seconds);
            report.metric("eval_mse", best.eval_mse);
            report.metric("train_mse", train_mse);
            if let Some(test) = test {
                let mse = model.mse(&read_data(&test)?)?;
                println!("test MSE {mse}");
                report.metric("test_mse", mse);
            }
            if let Some(path) = leaderboard {
                board.write_csv(&path, timing)?;
                report.output(&path);
            }
            if let Some(path) = model_out {
                save_model(&model, &path)?;
                report.output(&path);
            }
        }
        Command::Bench {
            table,
            out,
            seed,
            candidates,
            mlp,
        } => {
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))
                .map_err(Failure::Runtime)?;
            if table == 2 {
                let config = FitConfig::new(TABLE2_ALPHAS.to_vec());
                report.config = serde_json::json!({ "table": 2, "fit": config });
                let rows = tables::table2(&config)?;
                let path = out.join("table2.csv");
                tables::write_table2_csv(&rows, &path)?;
                println!("partition  subspaces  f1 train/test  f2 train/test  f3 train/test");
                for r in &rows {
                    let cells: Vec<String> = r.mse.iter().map(|m| format!("{:.4}/{:.4}", m.train, m.test)).collect();
                    println!("{:<9}  {:>9}  {}", r.partition, r.subspaces, cells.join("  "));
                }
                report.timing("fit_seconds", rows.iter().flat_map(|r| &r.fit_seconds).sum());
                report.output(&path);
            } else {
                let mut config = Table1Config::new(seed);
                config.selection.candidates = candidates;
                config.mlp = mlp.config(seed);
                config.mlp_runs = mlp.mlp_runs;
                config.mlp.validate()?;
                config.selection.validate(3)?;
                report.config = serde_json::json!({ "table": 1, "config": config });
                let rows = tables::table1(&config)?;
                let path = out.join("table1.csv");
                tables::write_table1_csv(&rows, &path)?;
                println!("method   function  train_seconds  train_mse  test_mse");
                for r in &rows {
                    println!(
                        "{:<8} {:<9} {:>13.3} {:>10.5} {:>9.5}",
                        r.method, r.function, r.train_seconds, r.train_mse, r.test_mse
                    );
                    report.timing(&format!("{}_{}", r.method, r.function), r.train_seconds);
                    if !r.history.is_empty() {
                        let history = out.join(format!("mlp_history_{}.csv", r.function));
                        pairnet_core::baseline::write_history_csv(&r.history, &history)?;
                        report.output(&history);
                    }
                }
                report.output(&path);
            }
        }
    }
    Ok(())
}

/// Builds the global thread pool from `PAIRNET_THREADS` (0 or unset: automatic).
fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("PAIRNET_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| usage(format!("PAIRNET_THREADS must be a non-negative integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring thread pool")
        .map_err(Failure::Runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report_path = cli.report.clone();
    let mut report = RunReport {
        command: std::env::args().collect(),
        ..RunReport::default()
    };
    let result = configure_threads().and_then(|_| run(cli, &mut report)).and_then(|_| {
        if let Some(path) = report_path {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            write_atomic(&path, |w| w.write_all(text.as_bytes()))?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
