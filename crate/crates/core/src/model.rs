//! The PairNet forward pass.
//!
//! For `n` inputs a local network has `2^n` fusion terms. Term `k` takes, for
//! input `i` (0-based), `g_i` when bit `n-1-i` of `k` is clear and `1 - g_i`
//! when it is set, so `k = 0` is the all-positive term and `k = 2^n - 1` the
//! all-complement term. With fusion weights `w_k = Σ_i α_i s_ik` the output is
//!
//! ```text
//! y = Σ_k β_k (c_k + θ_k γ_k),   β_k = w_k / 2^(n-1),   θ_k = (1 - w_k) / 2
//! ```
//!
//! which is linear in the parameters `(c, γ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationScope};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::partition::{Interval, Partition, SubspaceId};

/// Largest supported input dimension; a local network carries `2^(n+1)` parameters.
pub const MAX_INPUTS: usize = 20;

/// Tolerance on `Σ α_i = 1`.
pub const ALPHA_SUM_TOLERANCE: f64 = 1e-12;

/// Checks `0 ≤ α_i ≤ 1`, `Σ α_i = 1` and `1 ≤ n ≤ MAX_INPUTS`.
pub fn validate_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Config("at least one fusion weight is required".into()));
    }
    if alphas.len() > MAX_INPUTS {
        return Err(Error::Config(format!(
            "{} inputs exceed the supported maximum of {MAX_INPUTS}: each local network needs 2^(n+1) parameters",
            alphas.len()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Config(format!("fusion weight {a} is outside [0, 1]")));
    }
    let sum: f64 = alphas.iter().sum();
    if (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
        return Err(Error::Config(format!("fusion weights sum to {sum}, expected 1")));
    }
    Ok(())
}

/// Equal fusion weights `1/n`.
pub fn equal_alphas(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Layer-2 complementary fusion weights `w_k`, `k = 0..2^n`.
pub fn layer2_weights(g: &[f64], alphas: &[f64]) -> Result<Vec<f64>> {
    if g.len() != alphas.len() {
        return Err(Error::DimensionMismatch {
            expected: alphas.len(),
            got: g.len(),
        });
    }
    validate_alphas(alphas)?;
    let mut w = vec![0.0; 1 << g.len()];
    fill_layer2(g, alphas, &mut w);
    Ok(w)
}

fn fill_layer2(g: &[f64], alphas: &[f64], w: &mut [f64]) {
    let n = g.len();
    for (k, wk) in w.iter_mut().enumerate() {
        *wk = g
            .iter()
            .zip(alphas)
            .enumerate()
            .map(|(i, (&gi, &a))| if k >> (n - 1 - i) & 1 == 0 { a * gi } else { a * (1.0 - gi) })
            .sum();
    }
}

/// `β_k = w_k / 2^(n-1)` where `w.len() = 2^n`.
pub fn betas(w: &[f64]) -> Vec<f64> {
    let half = (w.len() / 2).max(1) as f64;
    w.iter().map(|wk| wk / half).collect()
}

/// One subspace's fitted network.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPairNet {
    alphas: Vec<f64>,
    c: Vec<f64>,
    gamma: Vec<f64>,
    subspace: Vec<Interval>,
    frame: Vec<Interval>,
    activation: ActivationKind,
    fallback_mean: Option<f64>,
}

impl LocalPairNet {
    /// A network whose activations are normalized over its own `subspace`.
    pub fn new(
        alphas: Vec<f64>,
        c: Vec<f64>,
        gamma: Vec<f64>,
        subspace: Vec<Interval>,
        activation: ActivationKind,
    ) -> Result<Self> {
        let frame = subspace.clone();
        LocalPairNet::with_frame(alphas, c, gamma, subspace, frame, activation)
    }

    /// Like [`LocalPairNet::new`], normalizing activations over `frame`
    /// instead of the subspace.
    pub fn with_frame(
        alphas: Vec<f64>,
        c: Vec<f64>,
        gamma: Vec<f64>,
        subspace: Vec<Interval>,
        frame: Vec<Interval>,
        activation: ActivationKind,
    ) -> Result<Self> {
        validate_alphas(&alphas)?;
        activation.validate()?;
        let n = alphas.len();
        let terms = 1usize << n;
        for (name, len) in [("c", c.len()), ("gamma", gamma.len())] {
            if len != terms {
                return Err(Error::Config(format!("`{name}` has {len} entries, expected 2^{n} = {terms}")));
            }
        }
        for (name, ivs) in [("subspace", &subspace), ("frame", &frame)] {
            if ivs.len() != n {
                return Err(Error::Config(format!("`{name}` has {} intervals, expected {n}", ivs.len())));
            }
            for (d, iv) in ivs.iter().enumerate() {
                iv.validate(d)?;
            }
        }
        Ok(LocalPairNet {
            alphas,
            c,
            gamma,
            subspace,
            frame,
            activation,
            fallback_mean: None,
        })
    }

    /// Constant model predicting `mean`, used when a subspace is too sparse to fit.
    pub fn constant(
        alphas: Vec<f64>,
        subspace: Vec<Interval>,
        frame: Vec<Interval>,
        activation: ActivationKind,
        mean: f64,
    ) -> Result<Self> {
        let terms = 1usize << alphas.len().min(MAX_INPUTS);
        let mut local = LocalPairNet::with_frame(alphas, vec![mean; terms], vec![0.0; terms], subspace, frame, activation)?;
        local.fallback_mean = Some(mean);
        Ok(local)
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// Number of fusion terms, `2^n`.
    pub fn terms(&self) -> usize {
        self.c.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn subspace(&self) -> &[Interval] {
        &self.subspace
    }

    pub fn frame(&self) -> &[Interval] {
        &self.frame
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn fallback_mean(&self) -> Option<f64> {
        self.fallback_mean
    }

    pub(crate) fn set_fallback_mean(&mut self, mean: Option<f64>) {
        self.fallback_mean = mean;
    }

    /// Parameters stacked as `[c; γ]`, the order matching [`LocalPairNet::feature_row`].
    pub fn params(&self) -> Vec<f64> {
        self.c.iter().chain(&self.gamma).copied().collect()
    }

    /// Replaces `(c, γ)` from a stacked `[c; γ]` vector and clears any fallback.
    pub fn set_params(&mut self, params: &[f64]) {
        let t = self.terms();
        assert_eq!(params.len(), 2 * t, "parameter vector length");
        self.c.copy_from_slice(&params[..t]);
        self.gamma.copy_from_slice(&params[t..]);
        self.fallback_mean = None;
    }

    /// Layer-1 activations `g_i` of `x`.
    pub fn activations(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.frame)
            .map(|(&xi, &iv)| self.activation.g(xi, iv))
            .collect()
    }

    /// `φ = [β_0..β_{T-1}, β_0 θ_0..β_{T-1} θ_{T-1}]` so that the output is `φ · [c; γ]`.
    pub fn feature_row(&self, x: &[f64]) -> Vec<f64> {
        let mut phi = vec![0.0; 2 * self.terms()];
        let mut scratch = vec![0.0; self.dim()];
        self.feature_row_into(x, &mut scratch, &mut phi);
        phi
    }

    pub(crate) fn feature_row_into(&self, x: &[f64], g: &mut [f64], phi: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        for ((gi, &xi), &iv) in g.iter_mut().zip(x).zip(&self.frame) {
            *gi = self.activation.g(xi, iv);
        }
        let t = self.terms();
        let (beta, beta_theta) = phi.split_at_mut(t);
        fill_layer2(g, &self.alphas, beta);
        let half = (t / 2).max(1) as f64;
        for (b, bt) in beta.iter_mut().zip(beta_theta.iter_mut()) {
            let w = *b;
            *b = w / half;
            *bt = *b * (1.0 - w) / 2.0;
        }
    }

    /// Output of the local network at `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        if let Some(mean) = self.fallback_mean {
            return mean;
        }
        let phi = self.feature_row(x);
        let (beta, beta_theta) = phi.split_at(self.terms());
        beta.iter().zip(&self.c).map(|(b, c)| b * c).sum::<f64>()
            + beta_theta.iter().zip(&self.gamma).map(|(b, g)| b * g).sum::<f64>()
    }
}

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub alphas: Vec<f64>,
    pub activation: ActivationKind,
    pub scope: ActivationScope,
    /// Seconds since the Unix epoch at the end of fitting.
    pub fitted_at: u64,
}

/// A partition and one local network per subspace, in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairNetModel {
    partition: Partition,
    locals: Vec<LocalPairNet>,
    provenance: Provenance,
}

impl PairNetModel {
    pub fn new(partition: Partition, locals: Vec<LocalPairNet>, provenance: Provenance) -> Result<Self> {
        if locals.len() != partition.len() {
            return Err(Error::Config(format!(
                "{} local networks for {} subspaces",
                locals.len(),
                partition.len()
            )));
        }
        for (j, local) in locals.iter().enumerate() {
            if local.dim() != partition.dim() {
                return Err(Error::DimensionMismatch {
                    expected: partition.dim(),
                    got: local.dim(),
                });
            }
            if local.subspace() != partition.subspace(SubspaceId(j)).as_slice() {
                return Err(Error::Config(format!("local network {j} does not cover subspace {j}")));
            }
        }
        Ok(PairNetModel {
            partition,
            locals,
            provenance,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn locals(&self) -> &[LocalPairNet] {
        &self.locals
    }

    pub fn local(&self, id: SubspaceId) -> &LocalPairNet {
        &self.locals[id.0]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn set_seed(&mut self, seed: Option<u64>) {
        self.provenance.seed = seed;
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    /// True when partitions and local networks agree, ignoring provenance.
    pub fn same_parameters(&self, other: &PairNetModel) -> bool {
        self.partition == other.partition && self.locals == other.locals
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        self.locals[self.partition.locate(x).0].predict(x)
    }

    /// Predictions for row-major `inputs` of width [`PairNetModel::dim`].
    pub fn forward_batch(&self, inputs: &[f64]) -> Vec<f64> {
        inputs
            .par_chunks_exact(self.dim())
            .map(|x| self.forward(x))
            .collect()
    }

    /// Mean squared error over `dataset`.
    pub fn mse(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dataset.dim(),
            });
        }
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let pred = self.forward_batch(dataset.inputs());
        let sse: f64 = pred
            .iter()
            .zip(dataset.targets())
            .map(|(p, y)| (y - p) * (y - p))
            .sum();
        Ok(sse / dataset.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize) -> Vec<Interval> {
        vec![Interval::new(0.0, 1.0).unwrap(); n]
    }

    fn random_local(rng: &mut ChaCha8Rng, n: usize, kind: ActivationKind) -> LocalPairNet {
        let mut alphas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = alphas.iter().sum();
        alphas.iter_mut().for_each(|a| *a /= s);
        let fix = 1.0 - alphas[1..].iter().sum::<f64>();
        alphas[0] = fix;
        let t = 1 << n;
        let c = (0..t).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let gamma = (0..t).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let sub: Vec<Interval> = (0..n)
            .map(|_| {
                let lo = rng.gen_range(-3.0..3.0);
                Interval::new(lo, lo + rng.gen_range(0.5..4.0)).unwrap()
            })
            .collect();
        LocalPairNet::new(alphas, c, gamma, sub, kind).unwrap()
    }

    #[test]
    fn layer2_worked_example() {
        let w = layer2_weights(&[0.8, 0.6], &[0.5, 0.5]).unwrap();
        let expect = [0.7, 0.6, 0.4, 0.3];
        for (a, b) in w.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-15);
        let beta = betas(&w);
        for (a, b) in beta.iter().zip([0.35, 0.3, 0.2, 0.15]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn layer2_term_order_follows_listing() {
        // Second-to-last term complements every input except the last.
        let g = [0.9, 0.7, 0.2];
        let a = [0.2, 0.3, 0.5];
        let w = layer2_weights(&g, &a).unwrap();
        assert_abs_diff_eq!(w[0], 0.2 * 0.9 + 0.3 * 0.7 + 0.5 * 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(w[6], 0.2 * 0.1 + 0.3 * 0.3 + 0.5 * 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(w[7], 0.2 * 0.1 + 0.3 * 0.3 + 0.5 * 0.8, epsilon = 1e-15);
    }

    #[test]
    fn layer2_extremes_and_errors() {
        let w = layer2_weights(&[1.0, 1.0, 1.0], &[0.1, 0.1, 0.8]).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-15);
        assert_eq!(w[7], 0.0);
        assert!(matches!(
            layer2_weights(&[0.5], &[0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(layer2_weights(&[0.5, 0.5], &[0.5, 0.6]).is_err());
        assert_eq!(betas(&[1.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn alpha_validation() {
        assert!(validate_alphas(&[0.1, 0.1, 0.8]).is_ok());
        assert!(validate_alphas(&[0.3, 0.3, 0.3]).is_err());
        assert!(validate_alphas(&[1.2, -0.2]).is_err());
        assert!(validate_alphas(&[]).is_err());
        let err = validate_alphas(&equal_alphas(21)).unwrap_err();
        assert!(err.to_string().contains("2^(n+1)"));
    }

    #[test]
    fn feature_row_extreme_point() {
        let local = LocalPairNet::new(vec![1.0], vec![0.0; 2], vec![0.0; 2], unit(1), ActivationKind::Linear).unwrap();
        assert_eq!(local.feature_row(&[0.0]), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_and_corner_outputs() {
        let local = LocalPairNet::new(
            vec![0.25, 0.75],
            vec![5.0; 4],
            vec![0.0; 4],
            unit(2),
            ActivationKind::sigmoid(),
        )
        .unwrap();
        for x in [[0.0, 0.0], [0.3, 0.9], [1.0, 0.5]] {
            assert_abs_diff_eq!(local.predict(&x), 5.0, epsilon = 1e-14);
        }
        let local = LocalPairNet::new(vec![1.0], vec![3.0, -2.0], vec![7.0, 11.0], unit(1), ActivationKind::Linear).unwrap();
        assert_eq!(local.predict(&[1.0]), 3.0);
    }

    #[test]
    fn fallback_mean_overrides() {
        let local = LocalPairNet::constant(vec![1.0], unit(1), unit(1), ActivationKind::Linear, 4.5).unwrap();
        assert_eq!(local.predict(&[0.2]), 4.5);
        assert_eq!(local.fallback_mean(), Some(4.5));
    }

    #[test]
    fn constructor_checks_lengths() {
        assert!(LocalPairNet::new(vec![0.5, 0.5], vec![0.0; 3], vec![0.0; 4], unit(2), ActivationKind::Linear).is_err());
        assert!(LocalPairNet::new(vec![0.5, 0.5], vec![0.0; 4], vec![0.0; 4], unit(1), ActivationKind::Linear).is_err());
    }

    // Literal four-layer pipeline: pair activations, fusion terms enumerated as
    // explicit sign patterns, per-term decisions, normalized weighted average.
    fn pipeline(local: &LocalPairNet, x: &[f64]) -> f64 {
        let n = local.dim();
        let pairs: Vec<(f64, f64)> = x
            .iter()
            .zip(local.frame())
            .map(|(&xi, &iv)| crate::activation::pair_activation(xi, iv, local.activation()))
            .collect();
        let mut patterns = vec![vec![]];
        for _ in 0..n {
            patterns = patterns
                .into_iter()
                .flat_map(|p: Vec<bool>| {
                    let mut a = p.clone();
                    a.push(false);
                    let mut b = p;
                    b.push(true);
                    [a, b]
                })
                .collect();
        }
        let w: Vec<f64> = patterns
            .iter()
            .map(|pat| {
                pat.iter()
                    .zip(&pairs)
                    .zip(local.alphas())
                    .map(|((&comp, &(g, gb)), a)| a * if comp { gb } else { g })
                    .sum()
            })
            .collect();
        let total: f64 = w.iter().sum();
        let decisions: Vec<f64> = w
            .iter()
            .zip(local.c().iter().zip(local.gamma()))
            .map(|(wk, (c, g))| c + (1.0 - wk) * g / 2.0)
            .collect();
        w.iter().zip(&decisions).map(|(wk, y)| wk / total * y).sum()
    }

    #[test]
    fn predict_matches_literal_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            for kind in [ActivationKind::Linear, ActivationKind::sigmoid()] {
                let local = random_local(&mut rng, n, kind);
                for _ in 0..50 {
                    let x: Vec<f64> = local
                        .subspace()
                        .iter()
                        .map(|iv| rng.gen_range(iv.lo - 0.2..iv.hi + 0.2))
                        .collect();
                    let a = local.predict(&x);
                    let b = pipeline(&local, &x);
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn two_path_feature_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let local = random_local(&mut rng, 3, ActivationKind::Linear);
        for _ in 0..100 {
            let x: Vec<f64> = local.subspace().iter().map(|iv| rng.gen_range(iv.lo..iv.hi)).collect();
            let phi = local.feature_row(&x);
            let dot: f64 = phi.iter().zip(local.params()).map(|(a, b)| a * b).sum();
            let g = local.activations(&x);
            let w = layer2_weights(&g, local.alphas()).unwrap();
            let beta = betas(&w);
            let direct: f64 = (0..8)
                .map(|k| beta[k] * (local.c()[k] + (1.0 - w[k]) / 2.0 * local.gamma()[k]))
                .sum();
            assert_abs_diff_eq!(dot, direct, epsilon = 1e-12);
            assert!(phi[8..].iter().zip(&phi[..8]).all(|(bt, b)| *bt >= 0.0 && *bt <= 0.5 * b + 1e-15));
        }
    }

    #[test]
    fn model_routes_to_upper_subspace_on_boundary() {
        let p = Partition::uniform(&[Interval::new(0.0, 2.0).unwrap()], &[2]).unwrap();
        let mk = |j: usize, v: f64| {
            LocalPairNet::new(vec![1.0], vec![v; 2], vec![0.0; 2], p.subspace(SubspaceId(j)), ActivationKind::Linear).unwrap()
        };
        let prov = Provenance {
            seed: None,
            alphas: vec![1.0],
            activation: ActivationKind::Linear,
            scope: ActivationScope::Subspace,
            fitted_at: 0,
        };
        let m = PairNetModel::new(p.clone(), vec![mk(0, -1.0), mk(1, 1.0)], prov.clone()).unwrap();
        assert_eq!(m.forward(&[1.0]), 1.0);
        assert_eq!(m.forward(&[0.999]), -1.0);
        assert_eq!(m.forward_batch(&[0.5, 1.0, 1.5]), vec![-1.0, 1.0, 1.0]);
        let swapped = vec![mk(1, 0.0), mk(0, 0.0)];
        assert!(PairNetModel::new(p.clone(), swapped, prov).is_err());
    }

    proptest! {
        #[test]
        fn fusion_weights_sum_identity(n in 1usize..8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let mut alphas: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = alphas.iter().sum();
            alphas.iter_mut().for_each(|a| *a /= s);
            let fix = 1.0 - alphas[1..].iter().sum::<f64>();
            alphas[0] = fix;
            let w = layer2_weights(&g, &alphas).unwrap();
            prop_assert!((w.iter().sum::<f64>() - (1u64 << (n - 1)) as f64).abs() < 1e-9);
            prop_assert!(w.iter().all(|wk| (-1e-15..=1.0 + 1e-15).contains(wk)));
            prop_assert!((betas(&w).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn output_is_linear_in_parameters(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let local = random_local(&mut rng, 3, ActivationKind::Linear);
            let p1: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p2: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x: Vec<f64> = local.subspace().iter().map(|iv| rng.gen_range(iv.lo..iv.hi)).collect();
            let phi = local.feature_row(&x);
            let dot = |p: &[f64]| phi.iter().zip(p).map(|(f, v)| f * v).sum::<f64>();
            let mix: Vec<f64> = p1.iter().zip(&p2).map(|(u, v)| a * u + b * v).collect();
            prop_assert!((dot(&mix) - (a * dot(&p1) + b * dot(&p2))).abs() < 1e-12);
        }

        #[test]
        fn complement_swap_symmetry(seed in any::<u64>(), flip in 0usize..3) {
            // Mirroring input `flip` inside its interval turns g into 1-g; swapping
            // the parameter pairs that differ only in that bit restores the output.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let local = random_local(&mut rng, 3, ActivationKind::Linear);
            let x: Vec<f64> = local.subspace().iter().map(|iv| rng.gen_range(iv.lo..iv.hi)).collect();
            let mut mirrored = x.clone();
            let iv = local.subspace()[flip];
            mirrored[flip] = iv.lo + iv.hi - x[flip];
            let bit = 1 << (2 - flip);
            let swap = |v: &[f64]| (0..8).map(|k| v[k ^ bit]).collect::<Vec<f64>>();
            let swapped = LocalPairNet::new(
                local.alphas().to_vec(),
                swap(local.c()),
                swap(local.gamma()),
                local.subspace().to_vec(),
                ActivationKind::Linear,
            ).unwrap();
            prop_assert!((local.predict(&x) - swapped.predict(&mirrored)).abs() < 1e-10);
        }

        #[test]
        fn zero_gamma_is_convex_combination(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut local = random_local(&mut rng, 3, ActivationKind::sigmoid());
            let mut p = local.params();
            p[8..].iter_mut().for_each(|g| *g = 0.0);
            local.set_params(&p);
            let lo = local.c().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = local.c().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let x: Vec<f64> = local.subspace().iter().map(|iv| rng.gen_range(iv.lo - 1.0..iv.hi + 1.0)).collect();
            let y = local.predict(&x);
            prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }
    }
}
