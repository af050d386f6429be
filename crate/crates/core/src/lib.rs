//! Robust unsupervised learning via order-statistic-weighted objectives.
//!
//! The central idea: given a model `S` (a set of k-means centers or a linear
//! subspace), rank the per-point distortions ascending and minimize a weighted
//! average that emphasizes small losses. With a hard-threshold weight this is
//! the mean of the smallest `zeta`-fraction of losses, which is resistant to
//! outliers. The solver alternates a model-descent step with re-ranking, which
//! never increases the objective.
//!
//! Modules:
//! - [`weights`]: weight profiles, cumulative weights and influence diagnostics
//! - [`lstat`]: loss ranking, the L-statistic objective and its variational form
//! - [`models`]: k-means / principal-subspace distortions and descent oracles
//! - [`solver`]: the alternating-minimization loop with restarts
//! - [`oracle`]: exact brute-force solvers and the clique reduction
//! - [`baselines`]: spherical-depth filtering and plain baselines
//! - [`data`]: synthetic generators, CSV ingestion, train/test protocols
//! - [`eval`]: reconstruction error, estimation gap, recovery metrics, sweeps

pub mod baselines;
pub mod data;
mod error;
pub mod eval;
pub mod lstat;
pub mod models;
pub mod oracle;
pub mod solver;
pub mod weights;

pub use error::{Error, Result};
