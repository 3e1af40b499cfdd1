//! Random-search model selection.
//!
//! An initial candidate plus `K` further candidates are drawn, each with a
//! random partition (and optionally random fusion weights). Every candidate
//! is fitted in closed form and scored; a candidate replaces the incumbent
//! only when its evaluation MSE is strictly lower, so ties keep the earlier
//! one. Candidate `i` draws from substream `i` of each named stream, which
//! makes results independent of evaluation order and thread count.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationScope};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::model::{validate_alphas, PairNetModel};
use crate::partition::Partition;
use crate::rng::{substream, Stream};
use crate::trainer::{fit, FitConfig, MinRowsPolicy, DEFAULT_RIDGE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Fixed(Vec<f64>),
    RandomSimplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Score on a seeded random holdout of `fraction` of the rows, then refit
    /// the winner on everything.
    Holdout { fraction: f64 },
    /// Score on the training rows themselves.
    Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Candidates drawn after the initial one (`K`).
    pub candidates: usize,
    /// Inclusive `[m_min, m_max]` interval count range per dimension.
    pub count_range: Vec<(usize, usize)>,
    pub alpha_mode: AlphaMode,
    pub eval_mode: EvalMode,
    pub seed: u64,
    pub activation: ActivationKind,
    pub scope: ActivationScope,
    pub ridge: f64,
    pub min_rows_policy: MinRowsPolicy,
}

impl SelectionConfig {
    /// Random fusion weights, counts in `[m_min, m_max]` for all `dim`
    /// inputs, 20% holdout.
    pub fn new(dim: usize, candidates: usize, count_range: (usize, usize), seed: u64) -> Self {
        SelectionConfig {
            candidates,
            count_range: vec![count_range; dim],
            alpha_mode: AlphaMode::RandomSimplex,
            eval_mode: EvalMode::Holdout { fraction: 0.2 },
            seed,
            activation: ActivationKind::Linear,
            scope: ActivationScope::Subspace,
            ridge: DEFAULT_RIDGE,
            min_rows_policy: MinRowsPolicy::FallbackMean,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.candidates == 0 {
            return Err(Error::Config("at least one candidate is required".into()));
        }
        if self.count_range.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.count_range.len(),
            });
        }
        if let AlphaMode::Fixed(alphas) = &self.alpha_mode {
            if alphas.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alphas.len(),
                });
            }
            validate_alphas(alphas)?;
        }
        if let EvalMode::Holdout { fraction } = self.eval_mode {
            if !(fraction > 0.0 && fraction <= 0.5) {
                return Err(Error::Config(format!("holdout fraction {fraction} is outside (0, 0.5]")));
            }
        }
        Ok(())
    }

    fn fit_config(&self, alphas: Vec<f64>) -> FitConfig {
        FitConfig {
            alphas,
            activation: self.activation,
            scope: self.scope,
            ridge: self.ridge,
            min_rows_policy: self.min_rows_policy,
        }
    }
}

/// Uniform sample from the probability simplex via sorted uniform spacings.
pub fn sample_alpha_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    assert!(n >= 1, "simplex dimension must be positive");
    let mut cuts: Vec<f64> = (1..n).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut alphas = Vec::with_capacity(n);
    let mut prev = 0.0;
    for c in cuts {
        alphas.push(c - prev);
        prev = c;
    }
    alphas.push(1.0 - prev);
    alphas
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderboardEntry {
    /// 0 is the initial model, `1..=K` the loop candidates.
    pub candidate: usize,
    pub seed: u64,
    pub partition: Partition,
    pub alphas: Vec<f64>,
    pub eval_mse: f64,
    pub train_mse: f64,
    pub fit_seconds: f64,
}

/// Successful candidates sorted by ascending evaluation MSE; equal scores
/// stay in candidate order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Leaderboard {
    pub entries: Vec<LeaderboardEntry>,
}

impl Leaderboard {
    pub fn best(&self) -> &LeaderboardEntry {
        &self.entries[0]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes one row per candidate. Timing is left out unless
    /// `include_timing`, so that reruns produce identical files.
    pub fn write_csv(&self, path: impl AsRef<Path>, include_timing: bool) -> Result<()> {
        write_atomic(path.as_ref(), |w| self.write_rows(w, include_timing))
    }

    fn write_rows(&self, w: &mut dyn Write, include_timing: bool) -> std::io::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let mut header = vec!["rank", "candidate", "seed", "partition", "breakpoints", "alphas", "eval_mse", "train_mse"];
        if include_timing {
            header.push("fit_seconds");
        }
        out.write_record(&header)?;
        for (rank, e) in self.entries.iter().enumerate() {
            let breakpoints = e
                .partition
                .breakpoints()
                .iter()
                .map(|b| b.iter().map(f64::to_string).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(";");
            let alphas = e.alphas.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            let mut row = vec![
                (rank + 1).to_string(),
                e.candidate.to_string(),
                e.seed.to_string(),
                e.partition.label(),
                breakpoints,
                alphas,
                e.eval_mse.to_string(),
                e.train_mse.to_string(),
            ];
            if include_timing {
                row.push(e.fit_seconds.to_string());
            }
            out.write_record(&row)?;
        }
        out.flush()
    }
}

fn split_holdout(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, Stream::Holdout, 0));
    let eval_len = ((fraction * n as f64).ceil() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut eval = order[..eval_len].to_vec();
    let mut train = order[eval_len..].to_vec();
    eval.sort_unstable();
    train.sort_unstable();
    (train, eval)
}

/// Draws candidate `index`: its partition and fusion weights.
fn draw_candidate(dataset: &Dataset, config: &SelectionConfig, index: usize) -> Result<(Partition, Vec<f64>)> {
    let mut prng = substream(config.seed, Stream::Partition, index as u64);
    let partition = Partition::random(dataset.domain(), &config.count_range, &mut prng)?;
    let alphas = match &config.alpha_mode {
        AlphaMode::Fixed(a) => a.clone(),
        AlphaMode::RandomSimplex => {
            sample_alpha_simplex(dataset.dim(), &mut substream(config.seed, Stream::Alpha, index as u64))
        }
    };
    Ok((partition, alphas))
}

/// Runs the random search and returns the best model with the leaderboard.
pub fn select_model(dataset: &Dataset, config: &SelectionConfig) -> Result<(PairNetModel, Leaderboard)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    config.validate(dataset.dim())?;
    let (train, eval) = match config.eval_mode {
        EvalMode::Holdout { fraction } => {
            let (t, e) = split_holdout(dataset.len(), fraction, config.seed);
            (dataset.subset(&t), Some(dataset.subset(&e)))
        }
        EvalMode::Training => (dataset.clone(), None),
    };

    let outcomes: Vec<Result<(LeaderboardEntry, PairNetModel)>> = (0..=config.candidates)
        .into_par_iter()
        .map(|index| {
            let (partition, alphas) = draw_candidate(dataset, config, index)?;
            let start = Instant::now();
            let (model, report) = fit(&train, &partition, &config.fit_config(alphas.clone()))?;
            let fit_seconds = start.elapsed().as_secs_f64();
            let eval_mse = match &eval {
                Some(e) => model.mse(e)?,
                None => report.train_mse,
            };
            let entry = LeaderboardEntry {
                candidate: index,
                seed: config.seed,
                partition,
                alphas,
                eval_mse,
                train_mse: report.train_mse,
                fit_seconds,
            };
            Ok((entry, model))
        })
        .collect();

    let mut entries = Vec::with_capacity(outcomes.len());
    let mut best: Option<(f64, PairNetModel)> = None;
    let mut last_err = None;
    for outcome in outcomes {
        match outcome {
            Ok((entry, model)) => {
                if best.as_ref().map_or(true, |(mse, _)| entry.eval_mse < *mse) {
                    best = Some((entry.eval_mse, model));
                }
                entries.push(entry);
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some((_, mut best_model)) = best else {
        return Err(last_err.unwrap_or(Error::EmptyDataset));
    };
    entries.sort_by(|a, b| a.eval_mse.total_cmp(&b.eval_mse));
    let leaderboard = Leaderboard { entries };

    if eval.is_some() {
        let winner = leaderboard.best();
        let (refit, _) = fit(dataset, &winner.partition, &config.fit_config(winner.alphas.clone()))?;
        best_model = refit;
    }
    best_model.set_seed(Some(config.seed));
    Ok((best_model, leaderboard))
}
