//! Comparison methods: spherical-depth outlier filtering composed with the
//! plain estimators.
//!
//! The plain kmeans++/PSA baselines are simply the solver with identity
//! weights, so there is no separate code path for them; this module adds the
//! depth scores, the filter, and the filter-then-fit pipeline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{rng_from_seed, Dataset};
use crate::error::{Error, Result};
use crate::solver::{fit, FitConfig, FitResult};
use crate::weights::WeightFunction;

/// Number of random pair-balls per point in the randomized variant, unless
/// overridden.
pub const DEFAULT_RANDOMIZED_PAIRS: usize = 4000;

/// Exact depth enumerates all unordered pairs; randomized draws `m` pairs
/// per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DepthMode {
    Exact,
    Randomized { m: usize, seed: u64 },
}

fn in_pair_ball(a: &[f64], b: &[f64], z: &[f64]) -> bool {
    // closed ball with diameter [a, b]: (a - z) . (b - z) <= 0
    let dp: f64 = a
        .iter()
        .zip(b)
        .zip(z)
        .map(|((x, y), t)| (x - t) * (y - t))
        .sum();
    dp <= 0.0
}

/// Spherical depth: for each point, the number of balls whose diameters are
/// pairs of distinct data points that contain it. Pairs with the point itself
/// as an endpoint always count (the product is zero on the boundary).
pub fn spherical_depth_scores(data: &Dataset, mode: DepthMode) -> Result<Vec<f64>> {
    let n = data.len();
    if n < 2 {
        return Err(Error::domain("spherical depth needs n >= 2"));
    }
    let points = data.points();
    match mode {
        DepthMode::Exact => Ok(points
            .iter()
            .map(|z| {
                let mut count = 0u64;
                for a in 0..n {
                    for b in (a + 1)..n {
                        if in_pair_ball(&points[a], &points[b], z) {
                            count += 1;
                        }
                    }
                }
                count as f64
            })
            .collect()),
        DepthMode::Randomized { m, seed } => {
            if m < 1 {
                return Err(Error::domain("randomized depth needs m >= 1"));
            }
            let mut rng = rng_from_seed(seed);
            Ok(points
                .iter()
                .map(|z| {
                    let mut count = 0u64;
                    for _ in 0..m {
                        let a = rng.gen_range(0..n);
                        let mut b = rng.gen_range(0..n - 1);
                        if b >= a {
                            b += 1;
                        }
                        if in_pair_ball(&points[a], &points[b], z) {
                            count += 1;
                        }
                    }
                    count as f64
                })
                .collect())
        }
    }
}

/// Keep the `ceil(zeta * n)` highest-scoring points; ties keep the earlier
/// index. Original point order is preserved in the output.
pub fn depth_filter(data: &Dataset, scores: &[f64], zeta: f64) -> Result<Dataset> {
    let n = data.len();
    if scores.len() != n {
        return Err(Error::domain("scores do not align with data"));
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::domain(format!("zeta must be in (0,1], got {zeta}")));
    }
    let keep = ((zeta * n as f64).ceil() as usize).min(n).max(1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut retained: Vec<usize> = idx[..keep].to_vec();
    retained.sort_unstable();
    data.select(&retained)
}

/// Depth-filter the data, then fit with identity weights on the retained
/// points. `cfg.model_kind` selects the downstream estimator; the weight in
/// `cfg` is ignored. Evaluation is expected to use full held-out data.
pub fn sd_pipeline(
    data: &Dataset,
    zeta: f64,
    mode: DepthMode,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let scores = spherical_depth_scores(data, mode)?;
    let retained = depth_filter(data, &scores, zeta)?;
    let cfg = FitConfig { weight: WeightFunction::identity(), ..cfg.clone() };
    fit(&retained, &cfg)
}
