//! Shallow pairwise networks trained in closed form.
//!
//! A PairNet maps `n` inputs to one output through four layers: pair
//! activations `(g_i, 1 - g_i)`, `2^n` complementary fusion weights, per-term
//! decisions, and a normalized weighted average. The output is linear in the
//! trainable parameters, so a network is fitted in one pass by solving the
//! least-squares normal equations. The input domain is partitioned into
//! axis-aligned subspaces and one local network is fitted per subspace.
//!
//! ```
//! use pairnet_core::{datasets, trainer, Partition};
//!
//! let train = datasets::gen_train(datasets::BenchmarkId::F2);
//! let partition = Partition::uniform(train.domain(), &[3, 3, 3]).unwrap();
//! let config = trainer::FitConfig::new(vec![0.1, 0.1, 0.8]);
//! let (model, report) = trainer::fit(&train, &partition, &config).unwrap();
//! assert_eq!(model.locals().len(), 27);
//! assert!(report.train_mse < 0.1);
//! ```

pub mod activation;
pub mod baseline;
pub mod datasets;
pub mod error;
mod fsutil;
pub mod linsolve;
pub mod model;
pub mod partition;
pub mod persistence;
pub mod rng;
pub mod selection;
pub mod tables;
pub mod trainer;

pub use activation::{ActivationKind, ActivationScope};
pub use baseline::{mlp_forward, mlp_train, MlpConfig, MlpModel};
pub use datasets::{BenchmarkId, Dataset};
pub use error::{Error, Result};
pub use fsutil::write_atomic;
pub use model::{LocalPairNet, PairNetModel};
pub use partition::{Interval, Partition, SubspaceId};
pub use persistence::{load_model, save_model};
pub use selection::{select_model, Leaderboard, SelectionConfig};
pub use tables::{table1, table2};
pub use trainer::{fit, FitConfig, FitReport};
