//! One-shot closed-form training.
//!
//! For each subspace the objective `Q = ½ Σ_p (Y_p − φ_pᵀ p)²` is quadratic in
//! the stacked parameters `p = [c; γ]`, so its stationary point solves the
//! normal equations `(Σ φ_p φ_pᵀ) p = Σ φ_p Y_p`. The Gram matrix is
//! accumulated in a single streaming pass over the subspace's rows.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationScope};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::linsolve::{solve_spd, DenseSystem, SolveDiagnostics};
use crate::model::{validate_alphas, LocalPairNet, PairNetModel, Provenance};
use crate::partition::{Interval, Partition, SubspaceId};

/// Default ridge, relative to the mean diagonal of the Gram matrix.
pub const DEFAULT_RIDGE: f64 = 1e-10;

/// What to do with a subspace holding fewer than `2^(n+1)` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MinRowsPolicy {
    Error,
    #[default]
    FallbackMean,
}

impl FromStr for MinRowsPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(MinRowsPolicy::Error),
            "fallback_mean" | "fallback-mean" => Ok(MinRowsPolicy::FallbackMean),
            _ => Err(Error::Config(format!("unknown min-rows policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub alphas: Vec<f64>,
    pub activation: ActivationKind,
    pub scope: ActivationScope,
    /// Ridge as a fraction of `trace(G)/d`; the solver may escalate it.
    pub ridge: f64,
    pub min_rows_policy: MinRowsPolicy,
}

impl FitConfig {
    pub fn new(alphas: Vec<f64>) -> Self {
        FitConfig {
            alphas,
            activation: ActivationKind::Linear,
            scope: ActivationScope::Subspace,
            ridge: DEFAULT_RIDGE,
            min_rows_policy: MinRowsPolicy::FallbackMean,
        }
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn with_activation(mut self, activation: ActivationKind) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_scope(mut self, scope: ActivationScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn with_policy(mut self, policy: MinRowsPolicy) -> Self {
        self.min_rows_policy = policy;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.alphas.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.alphas.len(),
            });
        }
        validate_alphas(&self.alphas)?;
        self.activation.validate()?;
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::Config(format!("ridge must be non-negative, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// Fewest rows a subspace needs for a least-squares fit, `2^(n+1)`.
pub fn min_rows(dim: usize) -> usize {
    2usize << dim
}

/// Outcome of fitting one subspace.
#[derive(Debug, Clone)]
pub struct LocalFit {
    pub local: LocalPairNet,
    /// `None` when the fallback constant model was used.
    pub diagnostics: Option<SolveDiagnostics>,
    /// Sum of squared training residuals.
    pub sse: f64,
    pub rows: usize,
}

/// Fits one local network to row-major `inputs` and `targets`.
///
/// `frame` is the box the activations are normalized over; pass `subspace`
/// for per-subspace normalization.
pub fn fit_local(
    inputs: &[f64],
    targets: &[f64],
    subspace: &[Interval],
    frame: &[Interval],
    config: &FitConfig,
) -> Result<LocalFit> {
    let dim = subspace.len();
    config.validate(dim)?;
    if inputs.len() != dim * targets.len() {
        return Err(Error::DimensionMismatch {
            expected: dim * targets.len(),
            got: inputs.len(),
        });
    }
    let rows = targets.len();
    let required = min_rows(dim);
    if rows < required {
        return match config.min_rows_policy {
            MinRowsPolicy::Error => Err(Error::InsufficientData { rows, required }),
            MinRowsPolicy::FallbackMean => {
                let mean = if rows == 0 {
                    0.0
                } else {
                    targets.iter().sum::<f64>() / rows as f64
                };
                let local = LocalPairNet::constant(
                    config.alphas.clone(),
                    subspace.to_vec(),
                    frame.to_vec(),
                    config.activation,
                    mean,
                )?;
                let sse = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
                Ok(LocalFit {
                    local,
                    diagnostics: None,
                    sse,
                    rows,
                })
            }
        };
    }

    let terms = 1usize << dim;
    let mut local = LocalPairNet::with_frame(
        config.alphas.clone(),
        vec![0.0; terms],
        vec![0.0; terms],
        subspace.to_vec(),
        frame.to_vec(),
        config.activation,
    )?;
    let mut system = DenseSystem::zeros(2 * terms);
    let mut g = vec![0.0; dim];
    let mut phi = vec![0.0; 2 * terms];
    for (x, &y) in inputs.chunks_exact(dim).zip(targets) {
        local.feature_row_into(x, &mut g, &mut phi);
        system.accumulate(&phi, y);
    }
    let ridge = config.ridge * system.diag_scale();
    let (params, diagnostics) = solve_spd(&system, ridge)?;
    local.set_params(&params);
    let sse = inputs
        .chunks_exact(dim)
        .zip(targets)
        .map(|(x, y)| (y - local.predict(x)).powi(2))
        .sum();
    Ok(LocalFit {
        local,
        diagnostics: Some(diagnostics),
        sse,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceReport {
    pub id: usize,
    pub rows: usize,
    pub sse: f64,
    pub fallback: bool,
    pub diagnostics: Option<SolveDiagnostics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub subspaces: Vec<SubspaceReport>,
    pub rows: usize,
    pub train_mse: f64,
    /// Wall-clock seconds spent routing and solving.
    pub fit_seconds: f64,
}

impl FitReport {
    /// Number of subspaces fitted with the constant fallback.
    pub fn fallbacks(&self) -> usize {
        self.subspaces.iter().filter(|s| s.fallback).count()
    }

    /// Number of subspaces whose solve needed ridge escalation.
    pub fn escalations(&self) -> usize {
        self.subspaces
            .iter()
            .filter(|s| s.diagnostics.is_some_and(|d| d.escalated()))
            .count()
    }

    /// One row per subspace.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), |w| self.write_rows(w))
    }

    fn write_rows(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "subspace,rows,sse,mse,fallback,ridge,escalations,residual")?;
        for s in &self.subspaces {
            let mse = if s.rows == 0 { 0.0 } else { s.sse / s.rows as f64 };
            let (ridge, esc, res) = match s.diagnostics {
                Some(d) => (d.ridge.to_string(), d.escalations.to_string(), d.residual.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            writeln!(w, "{},{},{},{},{},{},{},{}", s.id, s.rows, s.sse, mse, s.fallback, ridge, esc, res)?;
        }
        Ok(())
    }
}

/// Routes `dataset` through `partition` and fits every subspace.
pub fn fit(dataset: &Dataset, partition: &Partition, config: &FitConfig) -> Result<(PairNetModel, FitReport)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    config.validate(partition.dim())?;
    let start = Instant::now();
    let groups = partition.route(dataset)?;
    let domain = partition.domain();
    let fits: Vec<Result<LocalFit>> = groups
        .par_iter()
        .enumerate()
        .map(|(j, rows)| {
            let id = SubspaceId(j);
            let subset = dataset.subset(rows);
            let subspace = partition.subspace(id);
            let frame = match config.scope {
                ActivationScope::Subspace => &subspace,
                ActivationScope::Domain => &domain,
            };
            fit_local(subset.inputs(), subset.targets(), &subspace, frame, config).map_err(|e| e.in_subspace(id))
        })
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let fit_seconds = start.elapsed().as_secs_f64();

    let subspaces = fits
        .iter()
        .enumerate()
        .map(|(id, f)| SubspaceReport {
            id,
            rows: f.rows,
            sse: f.sse,
            fallback: f.diagnostics.is_none(),
            diagnostics: f.diagnostics,
        })
        .collect::<Vec<_>>();
    let provenance = Provenance {
        seed: None,
        alphas: config.alphas.clone(),
        activation: config.activation,
        scope: config.scope,
        fitted_at: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let locals = fits.into_iter().map(|f| f.local).collect();
    let model = PairNetModel::new(partition.clone(), locals, provenance)?;
    // Scored through the model rather than from the per-subspace sums so the
    // figure matches a later evaluation of the saved model bit for bit.
    let report = FitReport {
        subspaces,
        rows: dataset.len(),
        train_mse: model.mse(dataset)?,
        fit_seconds,
    };
    Ok((model, report))
}

/// `Q = ½ Σ (Y_p − f(x_p))²`; the MSE is `2Q/N`.
pub fn objective(model: &PairNetModel, dataset: &Dataset) -> Result<f64> {
    Ok(0.5 * model.mse(dataset)? * dataset.len() as f64)
}
