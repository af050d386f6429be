//! Weight profiles on [0,1] and influence diagnostics.
//!
//! A weight function `W` is non-increasing on `[0,1]` and, for the robust
//! kinds, zero above a cutoff mass `zeta`. The hard threshold
//! `W = zeta^-1 1_[0,zeta]` trims the largest `1 - zeta` fraction of losses;
//! the identity (`W = 1`) recovers the plain mean objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstat::LossVector;

/// A non-increasing weight profile on `[0,1]`.
///
/// The indicator interval of the hard threshold is closed at `zeta`: a point
/// whose rank fraction equals `zeta` exactly still receives weight `1/zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightFunction {
    #[serde(rename = "hard")]
    HardThreshold { zeta: f64 },
    Identity,
    #[serde(rename = "piecewise")]
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl WeightFunction {
    /// Hard threshold `W = zeta^-1 1_[0,zeta]`.
    pub fn hard(zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta <= 1.0) {
            return Err(Error::domain(format!("zeta must be in (0,1], got {zeta}")));
        }
        Ok(WeightFunction::HardThreshold { zeta })
    }

    /// Constant weight 1 (the plain, non-robust objective).
    pub fn identity() -> Self {
        WeightFunction::Identity
    }

    /// Piecewise-linear weight given by `(t, w)` knots sorted by `t`.
    ///
    /// Construction rejects increasing segments instead of clamping them.
    pub fn piecewise(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::domain("piecewise weight needs at least one knot"));
        }
        for &(t, w) in &knots {
            if !(0.0..=1.0).contains(&t) || !t.is_finite() {
                return Err(Error::domain(format!("knot abscissa {t} outside [0,1]")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::domain(format!("negative or non-finite knot weight {w}")));
            }
        }
        for pair in knots.windows(2) {
            let (t0, w0) = pair[0];
            let (t1, w1) = pair[1];
            if t1 <= t0 {
                return Err(Error::domain("piecewise knots must be strictly increasing in t"));
            }
            if w1 > w0 {
                return Err(Error::domain("piecewise weight must be non-increasing"));
            }
        }
        Ok(WeightFunction::PiecewiseLinear { knots })
    }

    /// Validate a deserialized value against the constructor invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunction::HardThreshold { zeta } => Self::hard(*zeta).map(|_| ()),
            WeightFunction::Identity => Ok(()),
            WeightFunction::PiecewiseLinear { knots } => {
                Self::piecewise(knots.clone()).map(|_| ())
            }
        }
    }

    /// Cutoff mass: the smallest `zeta` with `W(t) = 0` for all `t > zeta`,
    /// or 1 when the weight never vanishes.
    pub fn zeta(&self) -> f64 {
        match self {
            WeightFunction::HardThreshold { zeta } => *zeta,
            WeightFunction::Identity => 1.0,
            WeightFunction::PiecewiseLinear { knots } => {
                // first knot where W hits zero; linear pieces stay zero afterwards
                // because the profile is non-increasing and nonnegative
                for &(t, w) in knots {
                    if w == 0.0 {
                        return t;
                    }
                }
                1.0
            }
        }
    }

    /// Lipschitz seminorm; infinite for the hard threshold.
    pub fn lip_constant(&self) -> f64 {
        match self {
            WeightFunction::HardThreshold { .. } => f64::INFINITY,
            WeightFunction::Identity => 0.0,
            WeightFunction::PiecewiseLinear { knots } => knots
                .windows(2)
                .map(|p| (p[0].1 - p[1].1) / (p[1].0 - p[0].0))
                .fold(0.0_f64, f64::max),
        }
    }

    /// Evaluate `W(t)` for `t` in `[0,1]`.
    pub fn weight_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("t={t} outside [0,1]")));
        }
        Ok(self.weight_at_unchecked(t))
    }

    pub(crate) fn weight_at_unchecked(&self, t: f64) -> f64 {
        match self {
            WeightFunction::HardThreshold { zeta } => {
                if t <= *zeta {
                    1.0 / zeta
                } else {
                    0.0
                }
            }
            WeightFunction::Identity => 1.0,
            WeightFunction::PiecewiseLinear { knots } => {
                let first = knots[0];
                if t <= first.0 {
                    return first.1;
                }
                for pair in knots.windows(2) {
                    let (t0, w0) = pair[0];
                    let (t1, w1) = pair[1];
                    if t <= t1 {
                        return w0 + (w1 - w0) * (t - t0) / (t1 - t0);
                    }
                }
                knots.last().unwrap().1
            }
        }
    }

    /// Cumulative weight `K_W(t) = integral of W over [0, t]`, in closed form.
    pub fn cumulative_kw(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("t={t} outside [0,1]")));
        }
        Ok(self.cumulative_kw_unchecked(t))
    }

    pub(crate) fn cumulative_kw_unchecked(&self, t: f64) -> f64 {
        match self {
            WeightFunction::HardThreshold { zeta } => t.min(*zeta) / zeta,
            WeightFunction::Identity => t,
            WeightFunction::PiecewiseLinear { knots } => {
                let mut acc = 0.0;
                let first = knots[0];
                if t <= first.0 {
                    return t * first.1;
                }
                acc += first.0 * first.1;
                for pair in knots.windows(2) {
                    let (t0, w0) = pair[0];
                    let (t1, w1) = pair[1];
                    if t >= t1 {
                        acc += 0.5 * (w0 + w1) * (t1 - t0);
                    } else {
                        let wt = w0 + (w1 - w0) * (t - t0) / (t1 - t0);
                        acc += 0.5 * (w0 + wt) * (t - t0);
                        return acc;
                    }
                }
                let last = knots.last().unwrap();
                acc + (t - last.0) * last.1
            }
        }
    }
}

/// `Phi_W` of a discrete distribution, evaluated through `K_W` increments.
///
/// This form assigns the atom straddling the cutoff its partial mass, which
/// matches the measure-theoretic definition and makes finite-difference
/// influence checks consistent. Atoms with equal values are merged first.
pub fn phi_w_discrete(values: &[f64], probs: &[f64], w: &WeightFunction) -> Result<f64> {
    if values.is_empty() || values.len() != probs.len() {
        return Err(Error::domain("discrete distribution needs matching nonempty atoms"));
    }
    let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut phi = 0.0;
    let mut cdf = 0.0;
    let mut kw_prev = 0.0;
    for (v, p) in atoms {
        cdf = (cdf + p).min(1.0);
        let kw = w.cumulative_kw_unchecked(cdf);
        phi += v * (kw - kw_prev);
        kw_prev = kw;
    }
    Ok(phi)
}

/// Upper bound `IF_max` on the influence function of `Phi_W` at the empirical
/// loss distribution: the integral of `W(F(r)) F(r)` from 0 to the
/// `zeta`-quantile, an exact finite sum since the empirical CDF is a step
/// function.
pub fn if_max(w: &WeightFunction, losses: &LossVector) -> Result<f64> {
    let zeta = w.zeta();
    let sorted = losses.sorted();
    let n = sorted.len() as f64;
    let q = losses.empirical_quantile(zeta)?;
    let mut acc = 0.0;
    let mut i = 0usize;
    let values = sorted;
    while i < values.len() {
        let v = values[i];
        if v >= q {
            break;
        }
        // advance over ties to find the cdf level on [v, next)
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] == v {
            j += 1;
        }
        let cdf = (j + 1) as f64 / n;
        let next = if j + 1 < values.len() { values[j + 1].min(q) } else { q };
        acc += w.weight_at_unchecked(cdf) * cdf * (next - v);
        i = j + 1;
    }
    Ok(acc)
}

/// Influence of a point mass at `r_new` on the hard-threshold functional.
///
/// Applies the non-atomic closed form with the left-continuous generalized
/// inverse; on atomic empirical distributions the value can deviate from the
/// finite-difference derivative at quantile atoms.
pub fn influence_hard(r_new: f64, losses: &LossVector, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::domain(format!("zeta must be in (0,1), got {zeta}")));
    }
    if r_new < 0.0 {
        return Err(Error::domain("r_new must be nonnegative"));
    }
    let q = losses.empirical_quantile(zeta)?;
    let w = WeightFunction::hard(zeta)?;
    let n = losses.len() as f64;
    let probs = vec![1.0 / n; losses.len()];
    let phi = phi_w_discrete(losses.values(), &probs, &w)?;
    Ok(if r_new <= q {
        (r_new + (zeta - 1.0) * q) / zeta - phi
    } else {
        q - phi
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lv(values: &[f64]) -> LossVector {
        LossVector::new(values.to_vec()).unwrap()
    }

    /// Midpoint-rule quadrature of `W(F(r)) F(r)` over `[0, q]` against the
    /// empirical CDF, independent of the closed-form path.
    fn if_max_quadrature(w: &WeightFunction, values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let cdf = |r: f64| values.iter().filter(|&&v| v <= r).count() as f64 / n;
        let lv = lv(values);
        let q = lv.empirical_quantile(w.zeta()).unwrap();
        let steps = 400_000;
        let h = q / steps as f64;
        (0..steps)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                let f = cdf(r);
                w.weight_at_unchecked(f) * f * h
            })
            .sum()
    }

    #[test]
    fn weight_at_hard_boundary() {
        let w = WeightFunction::hard(0.5).unwrap();
        assert_eq!(w.weight_at(0.5).unwrap(), 2.0);
        assert_eq!(w.weight_at(0.75).unwrap(), 0.0);
        assert_eq!(WeightFunction::identity().weight_at(0.3).unwrap(), 1.0);
        assert!(w.weight_at(1.5).is_err());
        assert!(w.weight_at(-0.1).is_err());
    }

    #[test]
    fn cumulative_kw_closed_forms() {
        let w = WeightFunction::hard(0.5).unwrap();
        assert_relative_eq!(w.cumulative_kw(1.0).unwrap(), 1.0);
        assert_relative_eq!(WeightFunction::identity().cumulative_kw(0.4).unwrap(), 0.4);
        let w = WeightFunction::hard(0.25).unwrap();
        assert_relative_eq!(w.cumulative_kw(0.1).unwrap(), 0.4);
    }

    #[test]
    fn cumulative_kw_piecewise_matches_quadrature() {
        let w = WeightFunction::piecewise(vec![(0.0, 2.0), (0.5, 0.0)]).unwrap();
        for &t in &[0.1, 0.25, 0.5, 0.8, 1.0] {
            let steps = 200_000;
            let h = t / steps as f64;
            let quad: f64 = (0..steps)
                .map(|i| w.weight_at_unchecked((i as f64 + 0.5) * h) * h)
                .sum();
            assert_relative_eq!(w.cumulative_kw(t).unwrap(), quad, epsilon = 1e-6);
        }
    }

    #[test]
    fn piecewise_rejects_increasing() {
        assert!(WeightFunction::piecewise(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(WeightFunction::piecewise(vec![(0.5, 1.0), (0.2, 0.5)]).is_err());
    }

    #[test]
    fn if_max_identity_two_points() {
        let w = WeightFunction::identity();
        let losses = lv(&[0.0, 1.0]);
        assert_relative_eq!(if_max(&w, &losses).unwrap(), 0.5);
    }

    #[test]
    fn if_max_empty_range() {
        let w = WeightFunction::hard(0.5).unwrap();
        assert_eq!(if_max(&w, &lv(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn if_max_four_losses_against_quadrature() {
        // the closed-form sum over CDF gaps, frozen after confirming with the
        // quadrature oracle: zeta^-1 (0.25 + 0.5) = 1.0
        let w = WeightFunction::hard(0.75).unwrap();
        let values = [0.0, 1.0, 2.0, 3.0];
        let quad = if_max_quadrature(&w, &values);
        let exact = if_max(&w, &lv(&values)).unwrap();
        assert_relative_eq!(exact, quad, epsilon = 1e-4);
        assert_relative_eq!(exact, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn influence_hard_uniform_grid() {
        let n = 2000;
        let values: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let losses = lv(&values);
        let above = influence_hard(1.0, &losses, 0.5).unwrap();
        assert_relative_eq!(above, 0.25, epsilon = 2e-3);
        let below = influence_hard(0.0, &losses, 0.5).unwrap();
        assert_relative_eq!(below, -0.75, epsilon = 2e-3);
    }

    #[test]
    fn influence_hard_rejects_bad_zeta() {
        let losses = lv(&[1.0, 2.0]);
        assert!(influence_hard(1.0, &losses, 0.0).is_err());
        assert!(influence_hard(1.0, &losses, 1.0).is_err());
    }

    #[test]
    fn influence_matches_finite_difference() {
        // finite-difference oracle along the mixture (1-t) rho + t delta_R
        let mut rng = crate::data::rng_from_seed(7);
        use rand::Rng;
        for _ in 0..100 {
            let n = rng.gen_range(20..200);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let zeta = rng.gen_range(0.2..0.9);
            let r_new = rng.gen_range(0.0..15.0);
            let losses = lv(&values);
            let q = losses.empirical_quantile(zeta).unwrap();
            // widen at quantile atoms where the non-atomic formula may deviate
            let at_atom = values.iter().any(|&v| (v - q).abs() < 1e-9);
            let tol = if at_atom { 0.05 } else { 1e-2 };
            let t = 1e-4;
            let w = WeightFunction::hard(zeta).unwrap();
            let probs = vec![1.0 / n as f64; n];
            let phi0 = phi_w_discrete(&values, &probs, &w).unwrap();
            let mut mv = values.clone();
            mv.push(r_new);
            let mut mp = vec![(1.0 - t) / n as f64; n];
            mp.push(t);
            let phi_t = phi_w_discrete(&mv, &mp, &w).unwrap();
            let fd = (phi_t - phi0) / t;
            let ic = influence_hard(r_new, &losses, zeta).unwrap();
            assert!(
                (ic - fd).abs() <= tol,
                "ic={ic} fd={fd} zeta={zeta} r_new={r_new} at_atom={at_atom}"
            );
        }
    }

    proptest! {
        #[test]
        fn weight_monotone_and_cutoff(
            kind in 0..3usize,
            zeta in 0.05f64..1.0,
            ts in proptest::collection::vec(0.0f64..=1.0, 2..20),
        ) {
            let w = match kind {
                0 => WeightFunction::hard(zeta).unwrap(),
                1 => WeightFunction::identity(),
                _ => WeightFunction::piecewise(vec![(0.0, 2.0), (zeta, 0.0)]).unwrap(),
            };
            let mut sorted = ts.clone();
            sorted.sort_by(f64::total_cmp);
            for pair in sorted.windows(2) {
                prop_assert!(w.weight_at(pair[0]).unwrap() >= w.weight_at(pair[1]).unwrap());
            }
            for &t in &ts {
                if t > w.zeta() && kind != 1 {
                    prop_assert_eq!(w.weight_at(t).unwrap(), 0.0);
                }
            }
        }

        #[test]
        fn if_max_nonnegative(
            values in proptest::collection::vec(0.0f64..100.0, 1..50),
            zeta in 0.05f64..=1.0,
        ) {
            let w = WeightFunction::hard(zeta).unwrap();
            let losses = lv(&values);
            let v = if_max(&w, &losses).unwrap();
            prop_assert!(v >= 0.0);
            let q = losses.empirical_quantile(zeta).unwrap();
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(v == 0.0, q == min);
        }

        #[test]
        fn influence_bounded_above(
            values in proptest::collection::vec(0.0f64..50.0, 2..60),
            zeta in 0.1f64..0.95,
            rs in proptest::collection::vec(0.0f64..200.0, 1..10),
        ) {
            let losses = lv(&values);
            let q = losses.empirical_quantile(zeta).unwrap();
            let w = WeightFunction::hard(zeta).unwrap();
            let probs = vec![1.0 / values.len() as f64; values.len()];
            let phi = phi_w_discrete(&values, &probs, &w).unwrap();
            for &r in &rs {
                let ic = influence_hard(r, &losses, zeta).unwrap();
                prop_assert!(ic <= q - phi + 1e-12);
            }
        }
    }
}
