//! Browser demo bindings: three interactive operations exposed through
//! wasm-bindgen, each returning a JSON string the page renders on a canvas.
//!
//! All randomness is seeded, so moving a slider back reproduces the previous
//! picture exactly.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use robust_lstat::data::{gen_clusters_with_outliers, gen_psa_strip, MixtureSpec, PointLabel};
use robust_lstat::eval::subspace_angle;
use robust_lstat::lstat::LossVector;
use robust_lstat::models::{Model, Subspace};
use robust_lstat::solver::{fit, model_losses, FitConfig, ModelKind};
use robust_lstat::weights::{influence_hard, phi_w_discrete, WeightFunction};

#[derive(Serialize)]
struct ClusterDemo {
    points: Vec<Vec<f64>>,
    outlier: Vec<bool>,
    /// Whether the point falls inside the retained mass at the final ranking.
    kept: Vec<bool>,
    centers: Vec<Vec<f64>>,
    objective: f64,
}

#[derive(Serialize)]
struct PsaDemo {
    points: Vec<Vec<f64>>,
    outlier: Vec<bool>,
    robust_direction: Vec<f64>,
    plain_direction: Vec<f64>,
    robust_angle_deg: f64,
    plain_angle_deg: f64,
}

#[derive(Serialize)]
struct InfluenceDemo {
    r: Vec<f64>,
    influence: Vec<f64>,
    quantile: f64,
    upper_bound: f64,
}

fn err_json(message: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": message.to_string() }).to_string()
}

fn weight_for(zeta: f64) -> Result<WeightFunction, robust_lstat::Error> {
    if zeta >= 1.0 {
        Ok(WeightFunction::identity())
    } else {
        WeightFunction::hard(zeta)
    }
}

/// Robust k-means on the three-cluster mixture with an outlier blob.
/// `zeta = 1` runs the plain objective.
#[wasm_bindgen]
pub fn cluster_demo(seed: u64, zeta: f64, k: usize, restarts: usize) -> String {
    let run = || -> Result<String, robust_lstat::Error> {
        let data = gen_clusters_with_outliers(&MixtureSpec::synthetic_clusters(), seed)?;
        let mut cfg = FitConfig::new(ModelKind::KMeans { k }, weight_for(zeta)?);
        cfg.restarts = restarts.clamp(1, 50);
        cfg.max_iters = 30;
        cfg.seed = seed;
        let result = fit(&data, &cfg)?;
        let losses = model_losses(data.points(), &result.model)?;
        let ranking = robust_lstat::lstat::rank_losses(&losses);
        let n = data.len() as f64;
        let kept = (0..data.len())
            .map(|i| ranking.rank_of(i) as f64 / n <= zeta.min(1.0))
            .collect();
        let centers = match &result.model {
            Model::KMeans(s) => s.centers.clone(),
            _ => unreachable!(),
        };
        let payload = ClusterDemo {
            points: data.points().to_vec(),
            outlier: label_mask(&data),
            kept,
            centers,
            objective: result.final_objective,
        };
        Ok(serde_json::to_string(&payload).expect("demo payload serializes"))
    };
    run().unwrap_or_else(err_json)
}

fn label_mask(data: &robust_lstat::data::Dataset) -> Vec<bool> {
    data.labels()
        .map(|l| l.iter().map(|t| *t == PointLabel::Outlier).collect())
        .unwrap_or_else(|| vec![false; data.len()])
}

/// Robust vs plain one-dimensional subspace on the strip-plus-sectors data.
#[wasm_bindgen]
pub fn psa_demo(seed: u64, zeta: f64) -> String {
    let run = || -> Result<String, robust_lstat::Error> {
        let data = gen_psa_strip(seed)?;
        let fit_with = |w: WeightFunction| -> Result<Subspace, robust_lstat::Error> {
            let mut cfg = FitConfig::new(ModelKind::Psa { k: 1 }, w);
            cfg.restarts = 20;
            cfg.max_iters = 50;
            cfg.seed = seed;
            match fit(&data, &cfg)?.model {
                Model::Psa(u) => Ok(u),
                _ => unreachable!(),
            }
        };
        let robust = fit_with(weight_for(zeta)?)?;
        let plain = fit_with(WeightFunction::identity())?;
        let e1 = Subspace::new(vec![vec![1.0, 0.0]])?;
        let payload = PsaDemo {
            points: data.points().to_vec(),
            outlier: label_mask(&data),
            robust_direction: robust.basis[0].clone(),
            plain_direction: plain.basis[0].clone(),
            robust_angle_deg: subspace_angle(&robust, &e1)?.to_degrees(),
            plain_angle_deg: subspace_angle(&plain, &e1)?.to_degrees(),
        };
        Ok(serde_json::to_string(&payload).expect("demo payload serializes"))
    };
    run().unwrap_or_else(err_json)
}

/// Influence of a contaminating loss value on the trimmed objective, over a
/// grid of contamination sizes, for a seeded sample of unit-scale losses.
#[wasm_bindgen]
pub fn influence_demo(seed: u64, zeta: f64, n: usize) -> String {
    let run = || -> Result<String, robust_lstat::Error> {
        let n = n.clamp(10, 2000);
        let mut rng = robust_lstat::data::rng_from_seed(seed);
        use rand::Rng as _;
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let losses = LossVector::new(values.clone())?;
        let q = losses.empirical_quantile(zeta)?;
        let w = WeightFunction::hard(zeta)?;
        let probs = vec![1.0 / n as f64; n];
        let phi = phi_w_discrete(&values, &probs, &w)?;
        let steps = 200;
        let max_r = 2.0;
        let mut r = Vec::with_capacity(steps + 1);
        let mut influence = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let ri = max_r * i as f64 / steps as f64;
            r.push(ri);
            influence.push(influence_hard(ri, &losses, zeta)?);
        }
        let payload = InfluenceDemo { r, influence, quantile: q, upper_bound: q - phi };
        Ok(serde_json::to_string(&payload).expect("demo payload serializes"))
    };
    run().unwrap_or_else(err_json)
}
