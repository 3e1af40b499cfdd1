//! Layer-1 pair activations: an increasing map `g(x) ∈ [0, 1]` and its
//! complement `1 - g(x)`, both normalized over an interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Interval;

pub const DEFAULT_STEEPNESS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActivationKind {
    /// Min-max normalization clamped to `[0, 1]`.
    #[default]
    Linear,
    /// Logistic curve over the interval, affinely rescaled so that the
    /// endpoints map to exactly 0 and 1. `steepness` is measured in inverse
    /// half-widths of the interval.
    Sigmoid { steepness: f64 },
}

impl ActivationKind {
    pub fn sigmoid() -> Self {
        ActivationKind::Sigmoid {
            steepness: DEFAULT_STEEPNESS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ActivationKind::Linear => Ok(()),
            ActivationKind::Sigmoid { steepness } if steepness > 0.0 && steepness.is_finite() => Ok(()),
            ActivationKind::Sigmoid { steepness } => Err(Error::Config(format!(
                "sigmoid steepness must be positive, got {steepness}"
            ))),
        }
    }

    /// The increasing half `g` of the pair.
    pub fn g(&self, x: f64, interval: Interval) -> f64 {
        if !(x > interval.lo) {
            return 0.0;
        }
        if x >= interval.hi {
            return 1.0;
        }
        match *self {
            ActivationKind::Linear => ((x - interval.lo) / interval.width()).clamp(0.0, 1.0),
            ActivationKind::Sigmoid { steepness } => {
                // σ(k t) renormalized to [0, 1] on t ∈ [-1, 1], written via tanh
                // so that t = 0 gives exactly 1/2.
                let t = 2.0 * (x - interval.mid()) / interval.width();
                let g = 0.5 + 0.5 * (0.5 * steepness * t).tanh() / (0.5 * steepness).tanh();
                g.clamp(0.0, 1.0)
            }
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::Linear => f.write_str("linear"),
            ActivationKind::Sigmoid { steepness } => write!(f, "sigmoid:{steepness}"),
        }
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    /// `linear`, `sigmoid` or `sigmoid:<steepness>`.
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.split_once(':') {
            None if s == "linear" => ActivationKind::Linear,
            None if s == "sigmoid" => ActivationKind::sigmoid(),
            Some(("sigmoid", k)) => ActivationKind::Sigmoid {
                steepness: k
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid sigmoid steepness `{k}`")))?,
            },
            _ => return Err(Error::Config(format!("unknown activation `{s}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Which interval the activations of a local network are normalized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ActivationScope {
    /// The local network's own subspace cell.
    #[default]
    Subspace,
    /// The whole partition domain, shared by every local network.
    Domain,
}

impl FromStr for ActivationScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subspace" => Ok(ActivationScope::Subspace),
            "domain" => Ok(ActivationScope::Domain),
            _ => Err(Error::Config(format!("unknown activation scope `{s}`"))),
        }
    }
}

/// Returns `(g, 1 - g)` for `x` normalized over `interval`.
pub fn pair_activation(x: f64, interval: Interval, kind: ActivationKind) -> (f64, f64) {
    let g = kind.g(x, interval);
    (g, 1.0 - g)
}
