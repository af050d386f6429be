//! Alternating-minimization solver with restarts.
//!
//! Each restart initializes a model, then alternates a descent-oracle step at
//! the current ranking with re-ranking of the losses. Both steps are
//! non-increasing in the objective, so every per-restart trace descends. The
//! best restart by final objective wins, ties broken by lowest index.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{rng_substream, Dataset};
use crate::error::{Error, Result};
use crate::lstat::{lstat_objective, rank_losses, LossVector};
use crate::models::{
    kmeans_distortion, kmeans_oracle, psa_distortion, psa_oracle, CenterSet, Model, Subspace,
};
use crate::weights::WeightFunction;

/// Which model family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelKind {
    KMeans { k: usize },
    Psa { k: usize },
}

/// Initialization strategy per restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    Uniform,
    KMeansPp,
    GaussianOrthonormal,
}

/// Solver configuration. `tol` is the absolute objective-decrease stopping
/// threshold; `max_iters` remains an upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub model_kind: ModelKind,
    pub weight: WeightFunction,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub init: InitStrategy,
}

impl FitConfig {
    pub fn new(model_kind: ModelKind, weight: WeightFunction) -> Self {
        let init = match model_kind {
            ModelKind::KMeans { .. } => InitStrategy::Uniform,
            ModelKind::Psa { .. } => InitStrategy::GaussianOrthonormal,
        };
        FitConfig {
            model_kind,
            weight,
            max_iters: 50,
            restarts: 10,
            seed: 0,
            tol: 1e-7,
            init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::domain("max_iters must be >= 1"));
        }
        if self.restarts < 1 {
            return Err(Error::domain("restarts must be >= 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::domain("tol must be >= 0"));
        }
        self.weight.validate()?;
        match (self.model_kind, self.init) {
            (ModelKind::KMeans { k }, InitStrategy::Uniform | InitStrategy::KMeansPp) => {
                if k < 1 {
                    return Err(Error::domain("k must be >= 1"));
                }
                Ok(())
            }
            (ModelKind::Psa { k }, InitStrategy::GaussianOrthonormal) => {
                if k < 1 {
                    return Err(Error::domain("k must be >= 1"));
                }
                Ok(())
            }
            (kind, init) => Err(Error::domain(format!(
                "init {init:?} does not apply to model {kind:?}"
            ))),
        }
    }
}

/// Outcome of a fit: the winning model plus the full objective trace of every
/// restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    /// One non-increasing objective trace per restart, entry 0 at init.
    pub objective_trace: Vec<Vec<f64>>,
    pub best_restart: usize,
    pub iterations_used: usize,
    pub final_objective: f64,
}

/// Losses of every data point under a model.
pub fn model_losses(points: &[Vec<f64>], model: &Model) -> Result<LossVector> {
    let values = points
        .iter()
        .map(|x| match model {
            Model::KMeans(s) => kmeans_distortion(x, s).map(|(d, _)| d),
            Model::Psa(s) => psa_distortion(x, s),
        })
        .collect::<Result<Vec<f64>>>()?;
    LossVector::new(values)
}

/// Draw k distinct data points uniformly without replacement.
pub fn init_uniform<R: Rng>(data: &Dataset, k: usize, rng: &mut R) -> Result<CenterSet> {
    let n = data.len();
    if k > n {
        return Err(Error::domain(format!("k={k} exceeds n={n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for j in 0..k {
        let pick = rng.gen_range(j..n);
        idx.swap(j, pick);
    }
    CenterSet::new(idx[..k].iter().map(|&i| data.points()[i].clone()).collect())
}

/// D^2 seeding: first center uniform, each next center drawn with probability
/// proportional to squared distance to the nearest chosen center.
pub fn init_kmeanspp<R: Rng>(data: &Dataset, k: usize, rng: &mut R) -> Result<CenterSet> {
    let n = data.len();
    if k > n {
        return Err(Error::domain(format!("k={k} exceeds n={n}")));
    }
    let points = data.points();
    let mut centers = vec![points[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|x| {
            x.iter()
                .zip(&centers[0])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // all mass on chosen centers already; fall back to uniform
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        };
        centers.push(points[next].clone());
        for (i, x) in points.iter().enumerate() {
            let dist: f64 = x
                .iter()
                .zip(centers.last().unwrap())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if dist < d2[i] {
                d2[i] = dist;
            }
        }
    }
    CenterSet::new(centers)
}

/// Random subspace: standard normal entries orthonormalized by Gram-Schmidt
/// with re-orthogonalization.
pub fn init_orthonormal<R: Rng>(d: usize, k: usize, rng: &mut R) -> Result<Subspace> {
    use rand_distr::{Distribution, StandardNormal};
    if k > d {
        return Err(Error::domain(format!("k={k} exceeds d={d}")));
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<f64> = (0..d)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        for _pass in 0..2 {
            for u in &cols {
                let proj = crate::models::dot(u, &v);
                for (a, b) in v.iter_mut().zip(u) {
                    *a -= proj * b;
                }
            }
        }
        let norm = crate::models::dot(&v, &v).sqrt();
        if norm < 1e-8 {
            continue; // degenerate draw, resample
        }
        cols.push(v.iter().map(|x| x / norm).collect());
    }
    Subspace::new(cols)
}

fn init_model<R: Rng>(data: &Dataset, cfg: &FitConfig, rng: &mut R) -> Result<Model> {
    match (cfg.model_kind, cfg.init) {
        (ModelKind::KMeans { k }, InitStrategy::Uniform) => {
            Ok(Model::KMeans(init_uniform(data, k, rng)?))
        }
        (ModelKind::KMeans { k }, InitStrategy::KMeansPp) => {
            Ok(Model::KMeans(init_kmeanspp(data, k, rng)?))
        }
        (ModelKind::Psa { k }, _) => Ok(Model::Psa(init_orthonormal(data.dim(), k, rng)?)),
        _ => Err(Error::domain("invalid init for model kind")),
    }
}

fn oracle_step(
    points: &[Vec<f64>],
    model: &Model,
    p: &crate::lstat::Ranking,
    w: &WeightFunction,
) -> Result<Model> {
    Ok(match model {
        Model::KMeans(s) => Model::KMeans(kmeans_oracle(points, s, p, w)?),
        Model::Psa(s) => Model::Psa(psa_oracle(points, p, w, s.k())?),
    })
}

/// Fit by alternating minimization over `cfg.restarts` restarts.
///
/// Deterministic given the seed: restart `j` draws from an independent
/// substream of `(seed, j)`, so serial and parallel execution agree.
pub fn fit(data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if let ModelKind::Psa { k } = cfg.model_kind {
        if k > data.dim() {
            return Err(Error::dimension(format!(
                "subspace k={k} exceeds data dimension {}",
                data.dim()
            )));
        }
    }
    let points = data.points();
    let mut best: Option<(usize, f64, Model, usize)> = None;
    let mut traces = Vec::with_capacity(cfg.restarts);
    for j in 0..cfg.restarts {
        let mut rng = rng_substream(cfg.seed, j as u64);
        let mut model = init_model(data, cfg, &mut rng)?;
        let mut losses = model_losses(points, &model)?;
        let mut pi = rank_losses(&losses);
        let mut objective = lstat_objective(&losses, &cfg.weight);
        let mut trace = vec![objective];
        let mut iterations = 0usize;
        for _t in 1..=cfg.max_iters {
            let next = oracle_step(points, &model, &pi, &cfg.weight)?;
            losses = model_losses(points, &next)?;
            pi = rank_losses(&losses);
            let next_objective = lstat_objective(&losses, &cfg.weight);
            model = next;
            iterations += 1;
            let decrease = objective - next_objective;
            objective = next_objective;
            trace.push(objective);
            if decrease < cfg.tol {
                break;
            }
        }
        let better = match &best {
            None => true,
            Some((_, best_obj, _, _)) => objective < *best_obj,
        };
        if better {
            best = Some((j, objective, model, iterations));
        }
        traces.push(trace);
    }
    let (best_restart, final_objective, model, iterations_used) = best.unwrap();
    Ok(FitResult {
        model,
        objective_trace: traces,
        best_restart,
        iterations_used,
        final_objective,
    })
}
