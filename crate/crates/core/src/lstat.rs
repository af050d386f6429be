//! Loss ranking and the empirical L-statistic objective.
//!
//! For losses `d_S(x_1..x_n)` with ascending ranking `pi`, the objective is
//! `(1/n) sum_i W(pi(i)/n) d_S(x_i)`, i.e. sorted losses weighted by
//! `W(rank/n)`. The permutation-parameterized surrogate `phi_S(x, p)` fixes an
//! arbitrary permutation `p` in place of `pi`; it is minimized over
//! permutations exactly at the ascending ranking.

use crate::error::{Error, Result};
use crate::weights::WeightFunction;

/// Per-point distortions, finite and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    values: Vec<f64>,
}

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("loss vector must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("losses must be finite and nonnegative"));
        }
        Ok(LossVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ascending copy of the values.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Left-continuous generalized inverse of the empirical CDF: the smallest
    /// loss value `r` with `#{v_i <= r} / n >= zeta`.
    pub fn empirical_quantile(&self, zeta: f64) -> Result<f64> {
        if !(zeta > 0.0 && zeta <= 1.0) {
            return Err(Error::domain(format!("zeta must be in (0,1], got {zeta}")));
        }
        let sorted = self.sorted();
        let n = sorted.len() as f64;
        // smallest k with k/n >= zeta; the epsilon absorbs rounding in
        // zeta * n when zeta was formed as k/n
        let k = (zeta * n - 1e-9).ceil() as usize;
        Ok(sorted[k.clamp(1, sorted.len()) - 1])
    }
}

/// Ascending ranking of a loss vector: `rank_of[i]` is the 1-based rank of
/// point `i`, ties broken by original index (stable).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    rank_of: Vec<usize>,
}

impl Ranking {
    /// Build from explicit 1-based ranks; must form a permutation of `1..=n`.
    pub fn from_ranks(rank_of: Vec<usize>) -> Result<Self> {
        let n = rank_of.len();
        let mut seen = vec![false; n];
        for &r in &rank_of {
            if r < 1 || r > n || seen[r - 1] {
                return Err(Error::domain("ranks do not form a permutation of 1..=n"));
            }
            seen[r - 1] = true;
        }
        Ok(Ranking { rank_of })
    }

    pub fn identity(n: usize) -> Self {
        Ranking { rank_of: (1..=n).collect() }
    }

    /// 1-based rank of point `i` (0-based index).
    pub fn rank_of(&self, i: usize) -> usize {
        self.rank_of[i]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank_of
    }

    pub fn len(&self) -> usize {
        self.rank_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_of.is_empty()
    }

    /// Point indices in ascending rank order.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0usize; self.rank_of.len()];
        for (i, &r) in self.rank_of.iter().enumerate() {
            order[r - 1] = i;
        }
        order
    }
}

/// Stable ascending ranking of the losses.
pub fn rank_losses(losses: &LossVector) -> Ranking {
    let n = losses.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        losses.values[a]
            .total_cmp(&losses.values[b])
            .then(a.cmp(&b))
    });
    let mut rank_of = vec![0usize; n];
    for (pos, &i) in idx.iter().enumerate() {
        rank_of[i] = pos + 1;
    }
    Ranking { rank_of }
}

/// Surrogate `phi_S(x, p) = (1/n) sum_i W(p(i)/n) d_S(x_i)` for a fixed
/// permutation `p`.
///
/// Summation runs in ascending-loss order so that `phi_perm` and
/// [`lstat_objective`] are bit-identical when `p` is the ascending ranking.
pub fn phi_perm(losses: &LossVector, w: &WeightFunction, p: &Ranking) -> Result<f64> {
    let n = losses.len();
    if p.len() != n {
        return Err(Error::domain(format!(
            "permutation length {} does not match {} losses",
            p.len(),
            n
        )));
    }
    let order = rank_losses(losses).order();
    let nf = n as f64;
    let mut acc = 0.0;
    for &i in &order {
        acc += w.weight_at_unchecked(p.rank_of(i) as f64 / nf) * losses.values[i];
    }
    Ok(acc / nf)
}

/// The empirical L-statistic objective: sorted losses weighted by `W(i/n)`.
///
/// With the hard threshold and `zeta * n` an integer this is the mean of the
/// `zeta * n` smallest losses; for non-integer `zeta * n` the effective
/// trimmed fraction is `floor(zeta * n) / n` (no interpolation).
pub fn lstat_objective(losses: &LossVector, w: &WeightFunction) -> f64 {
    let pi = rank_losses(losses);
    phi_perm(losses, w, &pi).expect("ranking length always matches")
}

/// Hard-threshold variational form
/// `sup_lambda { lambda - zeta^-1 mean(max(lambda - t_i, 0)) }`.
///
/// The objective in `lambda` is piecewise-linear and concave with kinks only
/// at the loss values, so the supremum is found exactly by checking each
/// distinct loss.
pub fn variational_hard(losses: &LossVector, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::domain(format!("zeta must be in (0,1), got {zeta}")));
    }
    let n = losses.len() as f64;
    let mut best = f64::NEG_INFINITY;
    for &lambda in losses.values() {
        let hinge: f64 = losses.values().iter().map(|&t| (lambda - t).max(0.0)).sum();
        best = best.max(lambda - hinge / (zeta * n));
    }
    Ok(best)
}
