//! Regression datasets, the three benchmark functions and their train/test grids.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::partition::Interval;

/// Rows of `(x_1..x_n, y)` plus the input domain they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    domain: Vec<Interval>,
}

impl Dataset {
    /// `inputs` is row-major, `targets.len()` rows of `dim` values each.
    pub fn new(dim: usize, inputs: Vec<f64>, targets: Vec<f64>, domain: Vec<Interval>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dataset dimension must be positive".into()));
        }
        if inputs.len() != dim * targets.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * targets.len(),
                got: inputs.len(),
            });
        }
        if domain.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: domain.len(),
            });
        }
        for (i, iv) in domain.iter().enumerate() {
            iv.validate(i)?;
        }
        Ok(Dataset {
            dim,
            inputs,
            targets,
            domain,
        })
    }

    /// Like [`Dataset::new`] with the domain set to the bounding box of the
    /// inputs. Constant columns are widened by ±0.5; an empty dataset gets `[0, 1]`.
    pub fn with_bounding_domain(dim: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        let domain = bounding_box(dim, &inputs);
        Dataset::new(dim, inputs, targets, domain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.inputs.chunks_exact(self.dim)
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Rows at `indices`, keeping this dataset's domain.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Dataset {
            dim: self.dim,
            inputs,
            targets,
            domain: self.domain.clone(),
        }
    }

    /// `(min, max)` of the targets, `None` when empty.
    pub fn target_range(&self) -> Option<(f64, f64)> {
        self.targets.iter().fold(None, |acc, &y| match acc {
            None => Some((y, y)),
            Some((lo, hi)) => Some((lo.min(y), hi.max(y))),
        })
    }
}

fn bounding_box(dim: usize, inputs: &[f64]) -> Vec<Interval> {
    (0..dim)
        .map(|d| {
            let (lo, hi) = inputs
                .iter()
                .skip(d)
                .step_by(dim)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if !lo.is_finite() || !hi.is_finite() {
                Interval { lo: 0.0, hi: 1.0 }
            } else if lo == hi {
                Interval {
                    lo: lo - 0.5,
                    hi: hi + 0.5,
                }
            } else {
                Interval { lo, hi }
            }
        })
        .collect()
}

/// One of the three 3-input benchmark functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkId {
    F1,
    F2,
    F3,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 3] = [BenchmarkId::F1, BenchmarkId::F2, BenchmarkId::F3];

    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkId::F1 => "f1",
            BenchmarkId::F2 => "f2",
            BenchmarkId::F3 => "f3",
        }
    }

    /// Closed form, assuming strictly positive inputs.
    fn eval_unchecked(&self, x: f64, y: f64, z: f64) -> f64 {
        match self {
            BenchmarkId::F1 => (1.0 + x.powf(0.5) + y.powf(-1.0) + z.powf(-1.5)).powi(2),
            BenchmarkId::F2 => {
                x.powf(1.25) * (x.powf(0.15) - z.powf(0.05)).sin() + y.powf(1.25) + z.powf(0.15)
            }
            BenchmarkId::F3 => (1.0 + x.powf(0.25) * z + y.powf(0.5) / z + z.powf(-0.05)).powi(2),
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(BenchmarkId::F1),
            "f2" => Ok(BenchmarkId::F2),
            "f3" => Ok(BenchmarkId::F3),
            other => Err(Error::Config(format!("unknown benchmark function `{other}` (expected f1, f2 or f3)"))),
        }
    }
}

pub fn benchmark_eval(id: BenchmarkId, x: f64, y: f64, z: f64) -> Result<f64> {
    for v in [x, y, z] {
        if !(v > 0.0) {
            return Err(Error::NonPositiveInput {
                function: id.as_str(),
                value: v,
            });
        }
    }
    Ok(id.eval_unchecked(x, y, z))
}

pub const TRAIN_ROWS: usize = 8000;
pub const TEST_ROWS: usize = 6859;

/// The benchmark input domain `[1, 20]^3`.
pub fn benchmark_domain() -> Vec<Interval> {
    vec![Interval { lo: 1.0, hi: 20.0 }; 3]
}

fn grid(id: BenchmarkId, rows: usize, side: usize, offset: f64) -> Dataset {
    let mut inputs = Vec::with_capacity(rows * 3);
    let mut targets = Vec::with_capacity(rows);
    for k in 0..rows {
        let x = offset + (k / (side * side)) as f64;
        let y = offset + ((k / side) % side) as f64;
        let z = offset + (k % side) as f64;
        inputs.extend_from_slice(&[x, y, z]);
        targets.push(id.eval_unchecked(x, y, z));
    }
    Dataset {
        dim: 3,
        inputs,
        targets,
        domain: benchmark_domain(),
    }
}

/// The 20×20×20 integer training grid on `[1, 20]^3`.
pub fn gen_train(id: BenchmarkId) -> Dataset {
    grid(id, TRAIN_ROWS, 20, 1.0)
}

/// The 19×19×19 half-integer testing grid `{1.5, ..., 19.5}^3`.
pub fn gen_test(id: BenchmarkId) -> Dataset {
    grid(id, TEST_ROWS, 19, 1.5)
}

/// Writes `x1,...,xn,y` CSV with shortest round-trip decimal values.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |w| {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let mut header: Vec<String> = (1..=dataset.dim).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(dataset.dim + 1);
        for (x, y) in dataset.rows().zip(&dataset.targets) {
            record.clear();
            record.extend(x.iter().map(|v| v.to_string()));
            record.push(y.to_string());
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    })
}

/// Reads a dataset written by [`write_csv`] (or any header + numeric CSV whose
/// last column is the target). The domain is the inputs' bounding box.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let width = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .len();
    if width < 2 {
        return Err(parse_err(1, format!("expected at least 2 columns, found {width}")));
    }
    let dim = width - 1;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", record.len())));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: `{field}` is not a number", col + 1)))?;
            if col < dim {
                inputs.push(v);
            } else {
                targets.push(v);
            }
        }
    }
    Dataset::with_bounding_domain(dim, inputs, targets)
}
