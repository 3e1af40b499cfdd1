//! Fully connected ReLU network trained by minibatch backpropagation, the
//! gradient-descent comparator for closed-form PairNet training.
//!
//! Inputs and targets are standardized with statistics from the training
//! data; the standardizer is stored with the model, so [`MlpModel::forward`]
//! takes and returns values in original units.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    /// Heavy-ball momentum: `v ← βv + g`, `θ ← θ − lr·v`.
    Momentum { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer widths; the output layer (width 1) is implicit.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    /// Twenty hidden layers of width 16, 500 epochs, momentum 0.9, lr 1e-3, batch 64.
    fn default() -> Self {
        MlpConfig {
            hidden: vec![16; 20],
            epochs: 500,
            learning_rate: 1e-3,
            optimizer: Optimizer::Momentum { beta: 0.9 },
            batch_size: 64,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("at least one non-empty hidden layer is required".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("invalid learning rate {}", self.learning_rate)));
        }
        if let Optimizer::Momentum { beta } = self.optimizer {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::Config(format!("momentum {beta} is outside [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Per-feature affine map `z = (x − mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(n: usize) -> Self {
        Standardizer {
            mean: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    /// Column statistics of row-major `values` with `n` columns. Constant
    /// columns get unit scale.
    pub fn fit(values: &[f64], n: usize) -> Self {
        let rows = (values.len() / n).max(1) as f64;
        let mut mean = vec![0.0; n];
        for row in values.chunks_exact(n) {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= rows);
        let mut var = vec![0.0; n];
        for row in values.chunks_exact(n) {
            var.iter_mut()
                .zip(row.iter().zip(&mean))
                .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
        }
        let scale = var
            .iter()
            .map(|s| {
                let sd = (s / rows).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for ((o, v), (m, s)) in out.iter_mut().zip(x).zip(self.mean.iter().zip(&self.scale)) {
            *o = (v - m) / s;
        }
    }
}

/// Dense layer with row-major `weights` of shape `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for ((o, row), b) in out.iter_mut().zip(self.weights.chunks_exact(self.inputs)).zip(&self.bias) {
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
    pub inputs: Standardizer,
    pub target: Standardizer,
}

impl MlpModel {
    /// Checks that layer shapes chain from `inputs` to a single output.
    pub fn new(layers: Vec<Dense>, inputs: Standardizer, target: Standardizer) -> Result<Self> {
        let mut width = inputs.mean.len();
        for (i, l) in layers.iter().enumerate() {
            if l.inputs != width || l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::Config(format!("layer {i} has inconsistent shape")));
            }
            width = l.outputs;
        }
        if layers.is_empty() || width != 1 || target.mean.len() != 1 {
            return Err(Error::Config("network must end in a single output".into()));
        }
        Ok(MlpModel { layers, inputs, target })
    }

    /// He-initialized weights, zero biases.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = input_dim;
        for &out in hidden.iter().chain(std::iter::once(&1)) {
            let normal = Normal::new(0.0, (2.0 / width as f64).sqrt()).expect("positive std");
            let mut layer = Dense::zeros(width, out);
            layer.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
            layers.push(layer);
            width = out;
        }
        MlpModel {
            layers,
            inputs: Standardizer::identity(input_dim),
            target: Standardizer::identity(1),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count(), "parameter vector length");
        let mut rest = params;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.weights.len());
            l.weights.copy_from_slice(w);
            let (b, r) = r.split_at(l.bias.len());
            l.bias.copy_from_slice(b);
            rest = r;
        }
    }

    /// Network output for standardized input `z`, in standardized target units.
    pub fn forward_standardized(&self, z: &[f64]) -> f64 {
        let mut cur = z.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; l.outputs];
            l.apply(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            cur = next;
        }
        cur[0]
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut z = vec![0.0; x.len()];
        self.inputs.apply(x, &mut z);
        self.forward_standardized(&z) * self.target.scale[0] + self.target.mean[0]
    }

    pub fn mse(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: dataset.dim(),
            });
        }
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let sse: f64 = dataset
            .rows()
            .zip(dataset.targets())
            .map(|(x, y)| (self.forward(x) - y).powi(2))
            .sum();
        Ok(sse / dataset.len() as f64)
    }

    /// Mean squared error over standardized rows `zs` / targets `ts`, and its
    /// gradient in [`MlpModel::params`] order.
    pub fn loss_and_gradient(&self, zs: &[f64], ts: &[f64]) -> (f64, Vec<f64>) {
        let mut work = Workspace::new(self);
        let loss = work.batch(self, zs, ts);
        (loss, work.flat_grad(self))
    }
}

/// Shape-checked forward pass in original units.
pub fn mlp_forward(model: &MlpModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: x.len(),
        });
    }
    Ok(model.forward(x))
}

/// Reusable activations and gradient buffers for one network shape.
struct Workspace {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
    grad_w: Vec<Vec<f64>>,
    grad_b: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(model: &MlpModel) -> Self {
        let mut acts = vec![vec![0.0; model.input_dim()]];
        acts.extend(model.layers.iter().map(|l| vec![0.0; l.outputs]));
        Workspace {
            acts,
            deltas: model.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
            grad_w: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            grad_b: model.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
        }
    }

    /// Accumulates the gradient of the batch MSE; returns the batch MSE.
    fn batch(&mut self, model: &MlpModel, zs: &[f64], ts: &[f64]) -> f64 {
        self.grad_w.iter_mut().flatten().for_each(|g| *g = 0.0);
        self.grad_b.iter_mut().flatten().for_each(|g| *g = 0.0);
        let n_in = model.input_dim();
        let last = model.layers.len() - 1;
        let scale = 2.0 / ts.len() as f64;
        let mut loss = 0.0;
        for (z, &t) in zs.chunks_exact(n_in).zip(ts) {
            self.acts[0].copy_from_slice(z);
            for (i, l) in model.layers.iter().enumerate() {
                let (before, after) = self.acts.split_at_mut(i + 1);
                l.apply(&before[i], &mut after[0]);
                if i < last {
                    after[0].iter_mut().for_each(|v| *v = v.max(0.0));
                }
            }
            let err = self.acts[last + 1][0] - t;
            loss += err * err;
            self.deltas[last][0] = scale * err;
            for i in (0..=last).rev() {
                let l = &model.layers[i];
                let input = &self.acts[i];
                for (o, &d) in self.deltas[i].iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    self.grad_b[i][o] += d;
                    let gw = &mut self.grad_w[i][o * l.inputs..(o + 1) * l.inputs];
                    gw.iter_mut().zip(input).for_each(|(g, a)| *g += d * a);
                }
                if i > 0 {
                    let (lower, upper) = self.deltas.split_at_mut(i);
                    let prev = &mut lower[i - 1];
                    prev.iter_mut().for_each(|p| *p = 0.0);
                    for (o, &d) in upper[0].iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                        prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
                    }
                    // ReLU derivative: the stored activation is zero exactly where the unit is off.
                    prev.iter_mut()
                        .zip(&self.acts[i])
                        .for_each(|(p, a)| if *a <= 0.0 { *p = 0.0 });
                }
            }
        }
        loss / ts.len() as f64
    }

    fn flat_grad(&self, model: &MlpModel) -> Vec<f64> {
        let mut out = Vec::with_capacity(model.param_count());
        for (w, b) in self.grad_w.iter().zip(&self.grad_b) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct MlpFit {
    pub model: MlpModel,
    /// Mean minibatch MSE per epoch, in original target units.
    pub history: Vec<f64>,
    /// MSE of the final model over the whole training set.
    pub train_mse: f64,
    pub wall_seconds: f64,
}

impl MlpFit {
    pub fn write_history_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        write_history_csv(&self.history, path)
    }
}

/// Writes `epoch,train_mse` rows, epochs counted from 1.
pub fn write_history_csv(history: &[f64], path: impl AsRef<std::path::Path>) -> Result<()> {
    crate::fsutil::write_atomic(path.as_ref(), |w| {
        writeln!(w, "epoch,train_mse")?;
        for (i, mse) in history.iter().enumerate() {
            writeln!(w, "{},{mse}", i + 1)?;
        }
        Ok(())
    })
}

/// Trains an MLP on `dataset` by minibatch gradient descent.
pub fn mlp_train(dataset: &Dataset, config: &MlpConfig) -> Result<MlpFit> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let start = Instant::now();
    let n = dataset.dim();
    let mut model = MlpModel::init(n, &config.hidden, &mut substream(config.seed, Stream::MlpInit, 0));
    model.inputs = Standardizer::fit(dataset.inputs(), n);
    model.target = Standardizer::fit(dataset.targets(), 1);

    let mut zs = vec![0.0; dataset.inputs().len()];
    for (z, x) in zs.chunks_exact_mut(n).zip(dataset.rows()) {
        model.inputs.apply(x, z);
    }
    let ts: Vec<f64> = dataset
        .targets()
        .iter()
        .map(|y| (y - model.target.mean[0]) / model.target.scale[0])
        .collect();
    let unit_sq = model.target.scale[0] * model.target.scale[0];

    let mut shuffle_rng = substream(config.seed, Stream::MlpShuffle, 0);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut work = Workspace::new(&model);
    let mut velocity = vec![0.0; model.param_count()];
    let mut params = model.params();
    let mut batch_z = Vec::with_capacity(config.batch_size * n);
    let mut batch_t = Vec::with_capacity(config.batch_size);
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch_z.clear();
            batch_t.clear();
            for &i in chunk {
                batch_z.extend_from_slice(&zs[i * n..(i + 1) * n]);
                batch_t.push(ts[i]);
            }
            let loss = work.batch(&model, &batch_z, &batch_t);
            epoch_loss += loss * chunk.len() as f64;
            let grad = work.flat_grad(&model);
            match config.optimizer {
                Optimizer::Sgd => params
                    .iter_mut()
                    .zip(&grad)
                    .for_each(|(p, g)| *p -= config.learning_rate * g),
                Optimizer::Momentum { beta } => {
                    for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                        *v = beta * *v + g;
                        *p -= config.learning_rate * *v;
                    }
                }
            }
            model.set_params(&params);
        }
        let mse = epoch_loss / dataset.len() as f64 * unit_sq;
        if !mse.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(mse);
    }
    let train_mse = model.mse(dataset)?;
    if !train_mse.is_finite() {
        return Err(Error::Diverged { epoch: config.epochs });
    }
    Ok(MlpFit {
        model,
        history,
        train_mse,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
