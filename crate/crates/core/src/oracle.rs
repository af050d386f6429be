//! Exact brute-force solvers and the clique reduction, used as ground truth.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default enumeration guards; overridable for deliberate larger runs.
pub const BRUTE_FORCE_MAX_N: usize = 24;
pub const CLIQUE_DECISION_MAX_N: usize = 12;

/// Optimal size-h subset for robust 1-means, found by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    /// Chosen point indices, ascending.
    pub subset: Vec<usize>,
    /// Arithmetic mean of the subset.
    pub center: Vec<f64>,
    /// Sum of squared distances of the subset to its mean.
    pub cost: f64,
}

fn subset_cost(points: &[Vec<f64>], subset: &[usize]) -> (Vec<f64>, f64) {
    let d = points[0].len();
    let mut center = vec![0.0; d];
    for &i in subset {
        for (a, b) in center.iter_mut().zip(&points[i]) {
            *a += b;
        }
    }
    for a in &mut center {
        *a /= subset.len() as f64;
    }
    let cost = subset
        .iter()
        .map(|&i| {
            points[i]
                .iter()
                .zip(&center)
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
        })
        .sum();
    (center, cost)
}

/// Exhaustive robust 1-means: minimize subset SSE over all size-h subsets.
///
/// Ties break toward the lexicographically smallest subset, which is the
/// first one visited by the enumeration order.
pub fn brute_robust_1mean(data: &Dataset, h: usize) -> Result<BruteForceResult> {
    brute_robust_1mean_guarded(data, h, BRUTE_FORCE_MAX_N)
}

/// As [`brute_robust_1mean`] but with an explicit guard on n.
pub fn brute_robust_1mean_guarded(
    data: &Dataset,
    h: usize,
    max_n: usize,
) -> Result<BruteForceResult> {
    let n = data.len();
    if n > max_n {
        return Err(Error::guard(format!(
            "n={n} exceeds enumeration guard {max_n}"
        )));
    }
    if h < 1 || h > n {
        return Err(Error::domain(format!("need 1 <= h <= n, got h={h}, n={n}")));
    }
    let points = data.points();
    let mut best: Option<BruteForceResult> = None;
    // lexicographic enumeration of size-h index subsets
    let mut subset: Vec<usize> = (0..h).collect();
    loop {
        let (center, cost) = subset_cost(points, &subset);
        if best.as_ref().map_or(true, |b| cost < b.cost) {
            best = Some(BruteForceResult { subset: subset.clone(), center, cost });
        }
        // advance to the next combination
        let mut i = h;
        loop {
            if i == 0 {
                return Ok(best.unwrap());
            }
            i -= 1;
            if subset[i] < n - (h - i) {
                subset[i] += 1;
                for j in (i + 1)..h {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Subset cost in the pairwise form `(1 / (2|C|)) sum_{x,y in C} ||x-y||^2`
/// over ordered pairs; equals the SSE around the mean.
pub fn pairwise_cost(points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::domain("pairwise cost of an empty subset"));
    }
    let mut acc = 0.0;
    for a in points {
        for b in points {
            acc += a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
    }
    Ok(acc / (2.0 * points.len() as f64))
}

/// Embed a graph on n vertices into R^n: vertex i maps to row i of the
/// adjacency matrix plus n on coordinate i.
pub fn clique_embedding(adjacency: &[Vec<u8>]) -> Result<Dataset> {
    let n = adjacency.len();
    if n == 0 || adjacency.iter().any(|row| row.len() != n) {
        return Err(Error::domain("adjacency matrix must be square and nonempty"));
    }
    for i in 0..n {
        if adjacency[i][i] != 0 {
            return Err(Error::domain("adjacency diagonal must be zero"));
        }
        for j in 0..n {
            if adjacency[i][j] > 1 {
                return Err(Error::domain("adjacency entries must be 0/1"));
            }
            if adjacency[i][j] != adjacency[j][i] {
                return Err(Error::domain("adjacency matrix must be symmetric"));
            }
        }
    }
    let points = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| adjacency[i][j] as f64 + if i == j { n as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    Dataset::new(points)
}

/// Threshold separating size-n/2 clique subsets from all others in the
/// embedded instance: the largest cost a clique subset can attain.
///
/// Edge pairs in the embedding are at squared distance at most 2n^2 - 3n and
/// non-edge pairs at least 2n^2, so for the graph sizes the decision guard
/// admits the clique costs stay strictly below every non-clique cost.
pub fn derived_threshold(n: usize) -> f64 {
    let h = n / 2;
    let pairs = (h * (h - 1) / 2) as f64;
    pairs * (2 * n * n - 3 * n) as f64 / h as f64
}

/// Decide n/2-clique by embedding the graph and solving robust 1-means
/// exactly with h = n/2.
pub fn decide_clique_via_1means(adjacency: &[Vec<u8>], threshold: f64) -> Result<bool> {
    let n = adjacency.len();
    if n > CLIQUE_DECISION_MAX_N {
        return Err(Error::guard(format!(
            "n={n} exceeds clique decision guard {CLIQUE_DECISION_MAX_N}"
        )));
    }
    if n % 2 != 0 {
        return Err(Error::domain("clique decision needs even n"));
    }
    let data = clique_embedding(adjacency)?;
    let result = brute_robust_1mean(&data, n / 2)?;
    Ok(result.cost <= threshold)
}
