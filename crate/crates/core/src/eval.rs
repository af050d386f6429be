//! Evaluation metrics and the zeta-sweep harness.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{sd_pipeline, DepthMode};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lstat::lstat_objective;
use crate::models::{sym_eig_topk, CenterSet, Model, Subspace};
use crate::solver::{fit, model_losses, FitConfig, InitStrategy, ModelKind};
use crate::weights::WeightFunction;

/// Mean distortion over the test points, unweighted.
pub fn reconstruction_error(test: &Dataset, model: &Model) -> Result<f64> {
    let losses = model_losses(test.points(), model)?;
    Ok(losses.values().iter().sum::<f64>() / losses.len() as f64)
}

/// `|Phi_hat_W(train) - Phi_hat_W(holdout)|` for a fixed model, a Monte Carlo
/// proxy for one term of the uniform estimation bound.
pub fn estimation_gap(
    train: &Dataset,
    holdout: &Dataset,
    model: &Model,
    w: &WeightFunction,
) -> Result<f64> {
    let on_train = lstat_objective(&model_losses(train.points(), model)?, w);
    let on_holdout = lstat_objective(&model_losses(holdout.points(), model)?, w);
    Ok((on_train - on_holdout).abs())
}

/// Largest principal angle between two k-dimensional subspaces of the same
/// ambient space, in radians.
///
/// The cosines of the principal angles are the singular values of `A^T B`,
/// obtained here as square roots of the eigenvalues of `(A^T B)(A^T B)^T`.
pub fn subspace_angle(a: &Subspace, b: &Subspace) -> Result<f64> {
    if a.dim() != b.dim() || a.k() != b.k() {
        return Err(Error::dimension(format!(
            "subspace shapes differ: ({}, {}) vs ({}, {})",
            a.dim(),
            a.k(),
            b.dim(),
            b.k()
        )));
    }
    let k = a.k();
    let mut g = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            g[i][j] = crate::models::dot(&a.basis[i], &b.basis[j]);
        }
    }
    let mut ggt = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            ggt[i][j] = crate::models::dot(&g[i], &g[j]);
        }
    }
    let (eigs, _) = sym_eig_topk(&ggt, k)?;
    let sigma_min = eigs[k - 1].max(0.0).sqrt().clamp(0.0, 1.0);
    Ok(sigma_min.acos())
}

/// One-sided Hausdorff distance: for each true center, the distance to the
/// nearest learned center; returns the maximum.
pub fn center_recovery(true_centers: &CenterSet, learned: &CenterSet) -> Result<f64> {
    if true_centers.dim() != learned.dim() {
        return Err(Error::dimension("center sets have different dimensions"));
    }
    let mut worst: f64 = 0.0;
    for t in &true_centers.centers {
        let nearest = learned
            .centers
            .iter()
            .map(|c| {
                t.iter()
                    .zip(c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Algorithms the sweep knows how to run, named as on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Kmeans,
    Psa,
    Rkm,
    Rpsa,
    SdKmeans,
    SdPsa,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::Kmeans,
        Algo::Psa,
        Algo::Rkm,
        Algo::Rpsa,
        Algo::SdKmeans,
        Algo::SdPsa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Kmeans => "kmeans",
            Algo::Psa => "psa",
            Algo::Rkm => "rkm",
            Algo::Rpsa => "rpsa",
            Algo::SdKmeans => "sd-kmeans",
            Algo::SdPsa => "sd-psa",
        }
    }

    pub fn parse(s: &str) -> Result<Algo> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown algorithm {s:?}")))
    }

    fn is_subspace(self) -> bool {
        matches!(self, Algo::Psa | Algo::Rpsa | Algo::SdPsa)
    }

    /// Plain baselines ignore zeta and run once per seed.
    fn uses_zeta(self) -> bool {
        !matches!(self, Algo::Kmeans | Algo::Psa)
    }
}

/// Solver and depth parameters shared by every sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub k: usize,
    pub max_iters: usize,
    pub restarts: usize,
    /// `None` scores depth exactly; `Some(m)` uses m random pairs per point,
    /// seeded by the cell's seed.
    pub depth_pairs: Option<usize>,
}

impl SweepSettings {
    pub fn new(k: usize) -> Self {
        SweepSettings { k, max_iters: 50, restarts: 10, depth_pairs: None }
    }
}

/// One sweep cell, serialized as one JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub algo: String,
    pub zeta: f64,
    pub seed: u64,
    pub test_error: f64,
    pub train_objective: f64,
    pub wall_ms: f64,
}

fn fit_config(algo: Algo, zeta: f64, seed: u64, s: &SweepSettings) -> Result<FitConfig> {
    let kind = if algo.is_subspace() {
        ModelKind::Psa { k: s.k }
    } else {
        ModelKind::KMeans { k: s.k }
    };
    let weight = match algo {
        Algo::Rkm | Algo::Rpsa => WeightFunction::hard(zeta)?,
        _ => WeightFunction::identity(),
    };
    let mut cfg = FitConfig::new(kind, weight);
    if algo == Algo::Kmeans {
        // the plain baseline is kmeans++
        cfg.init = InitStrategy::KMeansPp;
    }
    cfg.max_iters = s.max_iters;
    cfg.restarts = s.restarts;
    cfg.seed = seed;
    Ok(cfg)
}

/// Run one algorithm on one split and time it.
pub fn run_cell(
    train: &Dataset,
    test: &Dataset,
    algo: Algo,
    zeta: f64,
    seed: u64,
    settings: &SweepSettings,
) -> Result<SweepRecord> {
    let cfg = fit_config(algo, zeta, seed, settings)?;
    let start = Instant::now();
    let result = match algo {
        Algo::SdKmeans | Algo::SdPsa => {
            let mode = match settings.depth_pairs {
                None => DepthMode::Exact,
                Some(m) => DepthMode::Randomized { m, seed },
            };
            sd_pipeline(train, zeta, mode, &cfg)?
        }
        _ => fit(train, &cfg)?,
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SweepRecord {
        algo: algo.name().to_string(),
        zeta,
        seed,
        test_error: reconstruction_error(test, &result.model)?,
        train_objective: result.final_objective,
        wall_ms,
    })
}

/// Run every algorithm at every zeta over every seed. `protocol` maps a seed
/// to a (train, test) split. Plain baselines run once per seed and report
/// zeta = 1. Records come back sorted by (algo, zeta, seed).
pub fn zeta_sweep<P>(
    protocol: P,
    zeta_grid: &[f64],
    algos: &[Algo],
    seeds: &[u64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>>
where
    P: Fn(u64) -> Result<(Dataset, Dataset)>,
{
    if zeta_grid.is_empty() || algos.is_empty() || seeds.is_empty() {
        return Err(Error::domain("sweep needs a nonempty grid, algos and seeds"));
    }
    for &z in zeta_grid {
        if !(z > 0.0 && z <= 1.0) {
            return Err(Error::domain(format!("zeta must be in (0,1], got {z}")));
        }
    }
    let mut records = Vec::new();
    for &seed in seeds {
        let (train, test) = protocol(seed)?;
        for &algo in algos {
            let zetas: &[f64] = if algo.uses_zeta() { zeta_grid } else { &[1.0] };
            for &zeta in zetas {
                records.push(run_cell(&train, &test, algo, zeta, seed, settings)?);
            }
        }
    }
    records.sort_by(|a, b| {
        a.algo
            .cmp(&b.algo)
            .then(a.zeta.total_cmp(&b.zeta))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(records)
}
