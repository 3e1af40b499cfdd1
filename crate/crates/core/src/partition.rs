//! Axis-aligned partitions of the input domain.
//!
//! Each dimension `i` carries a sorted breakpoint list `a_i = t_0 < t_1 < ... < t_{m_i} = b_i`
//! inducing `m_i` contiguous intervals. The product of the per-dimension
//! intervals gives `M = Π m_i` subspaces, addressed by a flat mixed-radix index
//! with dimension 0 as the most significant digit.
//!
//! Interval ownership is left-closed/right-open except for the last interval
//! of each dimension, which is closed. Points outside the domain clamp to the
//! nearest boundary interval, so [`Partition::locate`] is total.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};

/// Smallest admissible random interval, as a fraction of the domain width.
pub const MIN_WIDTH_FRACTION: f64 = 0.01;

/// Redraws allowed per dimension before a random partition is declared infeasible.
pub const MAX_REDRAWS: usize = 100;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let interval = Interval { lo, hi };
        interval.validate(0)?;
        Ok(interval)
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi {
            Ok(())
        } else {
            Err(Error::DegenerateInterval {
                dim,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Flat index of a subspace in `[0, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubspaceId(pub usize);

impl fmt::Display for SubspaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Partition {
    breakpoints: Vec<Vec<f64>>,
}

impl Partition {
    /// Builds a partition from explicit per-dimension breakpoint lists,
    /// each including both domain endpoints.
    pub fn from_breakpoints(breakpoints: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::Config("partition needs at least one dimension".into()));
        }
        for (dim, bps) in breakpoints.iter().enumerate() {
            if bps.len() < 2 {
                return Err(Error::Config(format!(
                    "dimension {dim} needs at least two breakpoints, got {}",
                    bps.len()
                )));
            }
            for w in bps.windows(2) {
                Interval { lo: w[0], hi: w[1] }.validate(dim)?;
            }
        }
        Ok(Partition { breakpoints })
    }

    /// Splits dimension `i` of `domain` into `counts[i]` equal-width intervals.
    pub fn uniform(domain: &[Interval], counts: &[usize]) -> Result<Self> {
        if domain.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: domain.len(),
                got: counts.len(),
            });
        }
        let mut breakpoints = Vec::with_capacity(domain.len());
        for (dim, (iv, &m)) in domain.iter().zip(counts).enumerate() {
            iv.validate(dim)?;
            if m == 0 {
                return Err(Error::Config(format!("interval count for dimension {dim} must be positive")));
            }
            let mut bps: Vec<f64> = (0..m)
                .map(|j| iv.lo + iv.width() * j as f64 / m as f64)
                .collect();
            bps.push(iv.hi);
            breakpoints.push(bps);
        }
        Partition::from_breakpoints(breakpoints)
    }

    /// Draws a random partition: per dimension a count uniform in
    /// `count_range[i]`, then sorted uniform interior breakpoints, redrawn
    /// while any interval is narrower than [`MIN_WIDTH_FRACTION`] of the domain.
    pub fn random<R: Rng + ?Sized>(
        domain: &[Interval],
        count_range: &[(usize, usize)],
        rng: &mut R,
    ) -> Result<Self> {
        if domain.len() != count_range.len() {
            return Err(Error::DimensionMismatch {
                expected: domain.len(),
                got: count_range.len(),
            });
        }
        let mut breakpoints = Vec::with_capacity(domain.len());
        for (dim, (iv, &(m_min, m_max))) in domain.iter().zip(count_range).enumerate() {
            iv.validate(dim)?;
            if m_min == 0 || m_min > m_max {
                return Err(Error::Config(format!(
                    "invalid count range [{m_min}, {m_max}] for dimension {dim}"
                )));
            }
            let m = rng.gen_range(m_min..=m_max);
            let min_width = MIN_WIDTH_FRACTION * iv.width();
            let mut accepted = None;
            for _ in 0..MAX_REDRAWS {
                let mut interior: Vec<f64> = (1..m).map(|_| rng.gen_range(iv.lo..iv.hi)).collect();
                interior.sort_by(f64::total_cmp);
                let mut bps = Vec::with_capacity(m + 1);
                bps.push(iv.lo);
                bps.extend(interior);
                bps.push(iv.hi);
                if bps.windows(2).all(|w| w[1] - w[0] >= min_width) {
                    accepted = Some(bps);
                    break;
                }
            }
            match accepted {
                Some(bps) => breakpoints.push(bps),
                None => {
                    return Err(Error::InfeasiblePartition {
                        dim,
                        count: m,
                        attempts: MAX_REDRAWS,
                    })
                }
            }
        }
        Partition::from_breakpoints(breakpoints)
    }

    /// [`Partition::random`] driven by the partition substream of `seed`.
    pub fn random_seeded(domain: &[Interval], count_range: &[(usize, usize)], seed: u64) -> Result<Self> {
        Partition::random(domain, count_range, &mut substream(seed, Stream::Partition, 0))
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    /// Intervals per dimension (`m_i`).
    pub fn counts(&self) -> Vec<usize> {
        self.breakpoints.iter().map(|b| b.len() - 1).collect()
    }

    /// Number of subspaces `M`.
    pub fn len(&self) -> usize {
        self.breakpoints.iter().map(|b| b.len() - 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn breakpoints(&self) -> &[Vec<f64>] {
        &self.breakpoints
    }

    pub fn domain(&self) -> Vec<Interval> {
        self.breakpoints
            .iter()
            .map(|b| Interval {
                lo: b[0],
                hi: b[b.len() - 1],
            })
            .collect()
    }

    /// `"2-3-4"` style label of the per-dimension counts.
    pub fn label(&self) -> String {
        self.counts()
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn interval(&self, dim: usize, index: usize) -> Interval {
        let b = &self.breakpoints[dim];
        Interval {
            lo: b[index],
            hi: b[index + 1],
        }
    }

    /// Flat index of a per-dimension interval tuple.
    pub fn encode(&self, indices: &[usize]) -> SubspaceId {
        debug_assert_eq!(indices.len(), self.dim());
        let flat = self
            .breakpoints
            .iter()
            .zip(indices)
            .fold(0, |acc, (b, &i)| {
                debug_assert!(i < b.len() - 1);
                acc * (b.len() - 1) + i
            });
        SubspaceId(flat)
    }

    /// Inverse of [`Partition::encode`].
    pub fn decode(&self, id: SubspaceId) -> Vec<usize> {
        let mut rest = id.0;
        let mut indices = vec![0; self.dim()];
        for (slot, b) in indices.iter_mut().zip(&self.breakpoints).rev() {
            let m = b.len() - 1;
            *slot = rest % m;
            rest /= m;
        }
        indices
    }

    /// The `n` intervals bounding subspace `id`.
    pub fn subspace(&self, id: SubspaceId) -> Vec<Interval> {
        self.decode(id)
            .into_iter()
            .enumerate()
            .map(|(dim, i)| self.interval(dim, i))
            .collect()
    }

    /// Interval index of `x` along `dim`.
    pub fn locate_dim(&self, dim: usize, x: f64) -> usize {
        let b = &self.breakpoints[dim];
        let interior = &b[1..b.len() - 1];
        interior.partition_point(|&t| t <= x)
    }

    pub fn locate(&self, point: &[f64]) -> SubspaceId {
        debug_assert_eq!(point.len(), self.dim());
        let flat = point
            .iter()
            .enumerate()
            .fold(0, |acc, (dim, &x)| {
                acc * (self.breakpoints[dim].len() - 1) + self.locate_dim(dim, x)
            });
        SubspaceId(flat)
    }

    /// Row indices of `dataset` grouped by subspace, in flat-index order.
    pub fn route(&self, dataset: &Dataset) -> Result<Vec<Vec<usize>>> {
        if dataset.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dataset.dim(),
            });
        }
        let mut groups = vec![Vec::new(); self.len()];
        for (row, x) in dataset.rows().enumerate() {
            groups[self.locate(x).0].push(row);
        }
        Ok(groups)
    }

    /// Refines the partition by splitting interval `index` of `dim` at `at`.
    pub fn split(&self, dim: usize, index: usize, at: f64) -> Result<Partition> {
        let iv = self.interval(dim, index);
        if !(at > iv.lo && at < iv.hi) {
            return Err(Error::Config(format!(
                "split point {at} is not inside [{}, {}]",
                iv.lo, iv.hi
            )));
        }
        let mut breakpoints = self.breakpoints.clone();
        breakpoints[dim].insert(index + 1, at);
        Partition::from_breakpoints(breakpoints)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(lo: f64, hi: f64, n: usize) -> Vec<Interval> {
        vec![Interval::new(lo, hi).unwrap(); n]
    }

    fn assert_tiles(p: &Partition, domain: &[Interval]) {
        for (b, iv) in p.breakpoints().iter().zip(domain) {
            assert_eq!(b[0], iv.lo);
            assert_eq!(*b.last().unwrap(), iv.hi);
            assert!(b.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn uniform_222_on_benchmark_domain() {
        let d = cube(1.0, 20.0, 3);
        let p = Partition::uniform(&d, &[2, 2, 2]).unwrap();
        assert_eq!(p.len(), 8);
        for b in p.breakpoints() {
            assert_eq!(b, &vec![1.0, 10.5, 20.0]);
        }
        assert_eq!(Partition::uniform(&d, &[6, 6, 6]).unwrap().len(), 216);
        assert_eq!(p.label(), "2-2-2");
    }

    #[test]
    fn uniform_identity() {
        let d = cube(0.0, 1.0, 1);
        let p = Partition::uniform(&d, &[1]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.interval(0, 0), Interval { lo: 0.0, hi: 1.0 });
    }

    #[test]
    fn uniform_rejects_bad_input() {
        let d = cube(1.0, 20.0, 2);
        assert!(matches!(Partition::uniform(&d, &[2, 0]), Err(Error::Config(_))));
        let bad = [Interval { lo: 3.0, hi: 3.0 }];
        assert!(matches!(
            Partition::uniform(&bad, &[2]),
            Err(Error::DegenerateInterval { .. })
        ));
        assert!(Interval::new(2.0, 1.0).is_err());
    }

    #[test]
    fn random_unit_range_is_identity() {
        let d = cube(1.0, 20.0, 3);
        for seed in 0..20 {
            let p = Partition::random_seeded(&d, &[(1, 1); 3], seed).unwrap();
            assert_eq!(p, Partition::uniform(&d, &[1, 1, 1]).unwrap());
        }
    }

    #[test]
    fn random_is_deterministic() {
        let d = cube(1.0, 20.0, 3);
        let a = Partition::random_seeded(&d, &[(2, 6); 3], 42).unwrap();
        let b = Partition::random_seeded(&d, &[(2, 6); 3], 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_seed_sweep_tiles() {
        let d = cube(1.0, 20.0, 3);
        for seed in 0..1000 {
            let p = Partition::random_seeded(&d, &[(2, 6); 3], seed).unwrap();
            assert_tiles(&p, &d);
            for (b, m) in p.breakpoints().iter().zip(p.counts()) {
                assert!((2..=6).contains(&m));
                assert!(b.windows(2).all(|w| w[1] - w[0] >= 0.19 - 1e-12));
            }
        }
    }

    #[test]
    fn random_infeasible_width_floor() {
        let d = cube(0.0, 1.0, 1);
        let err = Partition::random_seeded(&d, &[(100, 100)], 1).unwrap_err();
        assert!(matches!(err, Error::InfeasiblePartition { dim: 0, .. }));
    }

    #[test]
    fn locate_boundary_and_clamp() {
        let d = cube(1.0, 20.0, 1);
        let p = Partition::uniform(&d, &[2]).unwrap();
        assert_eq!(p.locate(&[10.5]), SubspaceId(1));
        assert_eq!(p.locate(&[10.4999]), SubspaceId(0));
        assert_eq!(p.locate(&[1.0]), SubspaceId(0));
        assert_eq!(p.locate(&[20.0]), SubspaceId(1));
        assert_eq!(p.locate(&[-5.0]), SubspaceId(0));
        assert_eq!(p.locate(&[99.0]), SubspaceId(1));
    }

    // Linear-scan oracle: first interval whose [lo, hi) holds x, the last
    // interval closed, clamping outside the domain.
    fn scan_dim(b: &[f64], x: f64) -> usize {
        let m = b.len() - 1;
        if x < b[0] {
            return 0;
        }
        for i in 0..m {
            let last = i == m - 1;
            if x >= b[i] && (x < b[i + 1] || (last && x <= b[i + 1])) {
                return i;
            }
        }
        m - 1
    }

    #[test]
    fn locate_matches_linear_scan_on_grid() {
        let d = cube(1.0, 20.0, 3);
        let p = Partition::random_seeded(&d, &[(2, 6); 3], 9).unwrap();
        let mut ticks: Vec<f64> = (0..=84).map(|k| 0.0 + 0.25 * k as f64).collect();
        for b in p.breakpoints() {
            ticks.extend(b.iter().copied());
        }
        for &x in &ticks {
            for &y in ticks.iter().step_by(3) {
                for &z in ticks.iter().step_by(5) {
                    let want: Vec<usize> = [x, y, z]
                        .iter()
                        .zip(p.breakpoints())
                        .map(|(&v, b)| scan_dim(b, v))
                        .collect();
                    assert_eq!(p.locate(&[x, y, z]), p.encode(&want));
                }
            }
        }
    }

    #[test]
    fn route_single_group_and_conservation() {
        let train = crate::datasets::gen_train(crate::datasets::BenchmarkId::F1);
        let one = Partition::uniform(train.domain(), &[1, 1, 1]).unwrap();
        let groups = one.route(&train).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 8000);

        let p = Partition::uniform(train.domain(), &[2, 2, 2]).unwrap();
        let groups = p.route(&train).unwrap();
        assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), 8000);
        for (j, g) in groups.iter().enumerate() {
            assert_eq!(g.len(), 1000);
            for &r in g {
                assert_eq!(p.locate(train.row(r)), SubspaceId(j));
            }
        }
    }

    #[test]
    fn route_dimension_mismatch() {
        let train = crate::datasets::gen_train(crate::datasets::BenchmarkId::F1);
        let p = Partition::uniform(&cube(1.0, 20.0, 2), &[2, 2]).unwrap();
        assert!(matches!(p.route(&train), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn split_refines() {
        let p = Partition::uniform(&cube(0.0, 1.0, 2), &[2, 1]).unwrap();
        let q = p.split(1, 0, 0.3).unwrap();
        assert_eq!(q.counts(), vec![2, 2]);
        assert_eq!(q.breakpoints()[1], vec![0.0, 0.3, 1.0]);
        assert!(p.split(0, 0, 0.7).is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_bijection(counts in proptest::collection::vec(1usize..6, 1..5), seed in any::<u64>()) {
            let d = cube(0.0, 1.0, counts.len());
            let p = Partition::uniform(&d, &counts).unwrap();
            let flat = (seed as usize) % p.len();
            let tuple = p.decode(SubspaceId(flat));
            prop_assert_eq!(p.encode(&tuple), SubspaceId(flat));
            for (i, m) in tuple.iter().zip(&counts) {
                prop_assert!(i < m);
            }
        }

        #[test]
        fn random_partitions_tile(seed in any::<u64>(), lo in -50.0f64..50.0, w in 0.5f64..100.0) {
            let d = cube(lo, lo + w, 3);
            let p = Partition::random_seeded(&d, &[(1, 8); 3], seed).unwrap();
            assert_tiles(&p, &d);
        }

        #[test]
        fn locate_is_total(x in proptest::num::f64::ANY, y in -1e3f64..1e3) {
            let p = Partition::uniform(&cube(1.0, 20.0, 2), &[3, 4]).unwrap();
            prop_assert!(p.locate(&[x, y]).0 < p.len());
        }
    }
}
