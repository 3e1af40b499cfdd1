//! Small dense symmetric positive (semi)definite solves via Cholesky.
//!
//! The normal equations of a local network have dimension `2^(n+1)`, so a
//! plain row-major Cholesky factorization is all that is needed. When the
//! Gram matrix is rank deficient the ridge is escalated by factors of ten
//! until the factorization succeeds or the ridge reaches
//! [`MAX_RIDGE_FRACTION`] of the mean diagonal.

use serde::Serialize;

use crate::error::{Error, Result};

/// Pivots below this fraction of their (regularized) diagonal entry are
/// treated as non-positive.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// First ridge tried, relative to `trace(G)/d`, when escalating from zero.
pub const ESCALATION_START_FRACTION: f64 = 1e-12;

/// Ridge escalation stops past this fraction of `trace(G)/d`.
pub const MAX_RIDGE_FRACTION: f64 = 1e-4;

/// A `d × d` symmetric Gram matrix `G` and right-hand side `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    dim: usize,
    gram: Vec<f64>,
    rhs: Vec<f64>,
}

impl DenseSystem {
    pub fn new(gram: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let dim = rhs.len();
        if dim == 0 {
            return Err(Error::Config("empty linear system".into()));
        }
        if gram.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: gram.len(),
            });
        }
        let scale = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (gram[i * dim + j], gram[j * dim + i]);
                if (a - b).abs() > 1e-10 * scale {
                    return Err(Error::Config(format!("Gram matrix is not symmetric at ({i}, {j}): {a} vs {b}")));
                }
            }
        }
        Ok(DenseSystem { dim, gram, rhs })
    }

    /// All-zero system of dimension `dim`, ready for [`DenseSystem::accumulate`].
    pub fn zeros(dim: usize) -> Self {
        DenseSystem {
            dim,
            gram: vec![0.0; dim * dim],
            rhs: vec![0.0; dim],
        }
    }

    /// Adds `φ φᵀ` to `G` and `φ y` to `r`.
    pub fn accumulate(&mut self, phi: &[f64], y: f64) {
        debug_assert_eq!(phi.len(), self.dim);
        let d = self.dim;
        for (i, &pi) in phi.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let row = &mut self.gram[i * d..(i + 1) * d];
            for (g, &pj) in row.iter_mut().zip(phi) {
                *g += pi * pj;
            }
            self.rhs[i] += pi * y;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.gram[i * self.dim + i]).sum()
    }

    /// Mean diagonal entry `trace(G)/d`, the unit for relative ridges.
    pub fn diag_scale(&self) -> f64 {
        self.trace() / self.dim as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    /// Ridge actually used in the successful factorization.
    pub ridge: f64,
    /// Number of times the ridge was raised.
    pub escalations: u32,
    /// `‖(G + ridge·I) p − r‖`.
    pub residual: f64,
}

impl SolveDiagnostics {
    pub fn escalated(&self) -> bool {
        self.escalations > 0
    }
}

/// Solves `(G + ridge·I) p = r`, escalating the ridge when `G + ridge·I` is
/// not numerically positive definite.
pub fn solve_spd(system: &DenseSystem, ridge: f64) -> Result<(Vec<f64>, SolveDiagnostics)> {
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::Config(format!("ridge must be non-negative, got {ridge}")));
    }
    let scale = system.diag_scale();
    let cap = MAX_RIDGE_FRACTION * scale;
    let mut lambda = ridge;
    let mut escalations = 0;
    loop {
        if let Some(l) = cholesky(&system.gram, system.dim, lambda) {
            let p = cholesky_solve(&l, system.dim, &system.rhs);
            let residual = shifted_residual(&system.gram, system.dim, lambda, &p, &system.rhs);
            return Ok((
                p,
                SolveDiagnostics {
                    ridge: lambda,
                    escalations,
                    residual,
                },
            ));
        }
        let next = if lambda > 0.0 {
            lambda * 10.0
        } else {
            ESCALATION_START_FRACTION * scale
        };
        if !(next > 0.0) || !(next <= cap) {
            return Err(Error::Singular { ridge: lambda });
        }
        lambda = next;
        escalations += 1;
    }
}

/// `‖G p − r‖₂` for row-major `G` of size `r.len()²`.
pub fn residual_norm(gram: &[f64], p: &[f64], r: &[f64]) -> Result<f64> {
    let d = r.len();
    if gram.len() != d * d || p.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if p.len() != d { p.len() } else { gram.len() },
        });
    }
    Ok(shifted_residual(gram, d, 0.0, p, r))
}

fn shifted_residual(gram: &[f64], d: usize, shift: f64, p: &[f64], r: &[f64]) -> f64 {
    (0..d)
        .map(|i| {
            let row = &gram[i * d..(i + 1) * d];
            let gp: f64 = row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + shift * p[i];
            (gp - r[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Lower-triangular factor of `A + shift·I`, or `None` on a non-positive pivot.
fn cholesky(a: &[f64], d: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let diag = a[j * d + j] + shift;
        let s = diag - (0..j).map(|k| l[j * d + k] * l[j * d + k]).sum::<f64>();
        if !(s > PIVOT_TOLERANCE * diag) {
            return None;
        }
        let ljj = s.sqrt();
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let dot: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            l[i * d + j] = (a[i * d + j] - dot) / ljj;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for i in 0..d {
        let dot: f64 = (0..i).map(|k| l[i * d + k] * y[k]).sum();
        y[i] = (b[i] - dot) / l[i * d + i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let dot: f64 = (i + 1..d).map(|k| l[k * d + i] * x[k]).sum();
        x[i] = (y[i] - dot) / l[i * d + i];
    }
    x
}
