//! Model families, distortion evaluation and descent oracles.
//!
//! Two concrete families: k-means center sets with
//! `d_S(x) = min_c ||x - c||^2`, and k-dimensional principal subspaces with
//! `d_S(x) = ||x - U U^T x||^2`. Each family ships a descent oracle for the
//! permutation-fixed surrogate: a weighted Lloyd step for centers, and the
//! top-k eigenvectors of the weighted second-moment matrix for subspaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstat::Ranking;
use crate::weights::WeightFunction;

/// A set of k cluster centers in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSet {
    pub centers: Vec<Vec<f64>>,
}

impl CenterSet {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::domain("center set needs k >= 1"));
        }
        let d = centers[0].len();
        if centers.iter().any(|c| c.len() != d) {
            return Err(Error::dimension("centers have mixed dimensions"));
        }
        if centers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("center coordinates must be finite"));
        }
        Ok(CenterSet { centers })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }
}

/// A column-orthonormal basis of a k-dimensional subspace of R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    /// Basis columns, each of length d.
    pub basis: Vec<Vec<f64>>,
}

impl Subspace {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::domain("subspace needs k >= 1 basis columns"));
        }
        let d = basis[0].len();
        if basis.len() > d {
            return Err(Error::dimension("subspace dimension k exceeds ambient d"));
        }
        if basis.iter().any(|c| c.len() != d) {
            return Err(Error::dimension("basis columns have mixed lengths"));
        }
        let s = Subspace { basis };
        let err = s.orthonormality_defect();
        if err > 1e-8 {
            return Err(Error::domain(format!(
                "basis not orthonormal: Frobenius defect {err:.2e}"
            )));
        }
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    /// Frobenius norm of `U^T U - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.basis.len();
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                let g = dot(&self.basis[i], &self.basis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (g - target) * (g - target);
            }
        }
        acc.sqrt()
    }
}

/// Either model family, as produced by the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    KMeans(CenterSet),
    Psa(Subspace),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::KMeans(s) => s.dim(),
            Model::Psa(s) => s.dim(),
        }
    }

    /// Distortion of a point under this model.
    pub fn distortion(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::KMeans(s) => kmeans_distortion(x, s).map(|(d, _)| d),
            Model::Psa(s) => psa_distortion(x, s),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared distance to the nearest center and its index (ties -> lowest).
pub fn kmeans_distortion(x: &[f64], s: &CenterSet) -> Result<(f64, usize)> {
    if x.len() != s.dim() {
        return Err(Error::dimension(format!(
            "point dim {} vs centers dim {}",
            x.len(),
            s.dim()
        )));
    }
    let mut best = (f64::INFINITY, 0usize);
    for (j, c) in s.centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.0 {
            best = (d, j);
        }
    }
    Ok(best)
}

/// Squared residual of projecting onto the subspace, computed as
/// `||x||^2 - ||U^T x||^2` and clamped at zero against round-off.
pub fn psa_distortion(x: &[f64], s: &Subspace) -> Result<f64> {
    if x.len() != s.dim() {
        return Err(Error::dimension(format!(
            "point dim {} vs subspace dim {}",
            x.len(),
            s.dim()
        )));
    }
    let norm2 = dot(x, x);
    let proj2: f64 = s.basis.iter().map(|u| dot(u, x).powi(2)).sum();
    Ok((norm2 - proj2).max(0.0))
}

/// Weighted Lloyd step: assign each point to its nearest center under `s`,
/// then replace every center by the `W(p(i)/n)`-weighted mean of its cluster.
/// A cluster with zero total weight keeps its previous center.
pub fn kmeans_oracle(
    points: &[Vec<f64>],
    s: &CenterSet,
    p: &Ranking,
    w: &WeightFunction,
) -> Result<CenterSet> {
    let n = points.len();
    if p.len() != n {
        return Err(Error::domain("permutation length does not match data"));
    }
    let d = s.dim();
    let k = s.k();
    let nf = n as f64;
    let mut sums = vec![vec![0.0; d]; k];
    let mut wsum = vec![0.0; k];
    for (i, x) in points.iter().enumerate() {
        let (_, j) = kmeans_distortion(x, s)?;
        let wi = w.weight_at_unchecked(p.rank_of(i) as f64 / nf);
        for (a, b) in sums[j].iter_mut().zip(x) {
            *a += wi * b;
        }
        wsum[j] += wi;
    }
    let centers = (0..k)
        .map(|j| {
            if wsum[j] > 0.0 {
                sums[j].iter().map(|v| v / wsum[j]).collect()
            } else {
                s.centers[j].clone()
            }
        })
        .collect();
    CenterSet::new(centers)
}

/// Subspace descent step: top-k eigenvectors of the weighted second-moment
/// matrix `sum_i W(p(i)/n) x_i x_i^T` (uncentered).
pub fn psa_oracle(
    points: &[Vec<f64>],
    p: &Ranking,
    w: &WeightFunction,
    k: usize,
) -> Result<Subspace> {
    let n = points.len();
    if n == 0 {
        return Err(Error::domain("psa oracle needs data"));
    }
    if p.len() != n {
        return Err(Error::domain("permutation length does not match data"));
    }
    let d = points[0].len();
    if k < 1 || k > d {
        return Err(Error::dimension(format!("need 1 <= k <= d, got k={k}, d={d}")));
    }
    let nf = n as f64;
    let mut m = vec![vec![0.0; d]; d];
    for (i, x) in points.iter().enumerate() {
        let wi = w.weight_at_unchecked(p.rank_of(i) as f64 / nf);
        if wi == 0.0 {
            continue;
        }
        for a in 0..d {
            let wxa = wi * x[a];
            for b in a..d {
                m[a][b] += wxa * x[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            m[a][b] = m[b][a];
        }
    }
    let (_, vecs) = sym_eig_topk(&m, k)?;
    Subspace::new(vecs)
}

/// Top-k eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order; eigenvectors as orthonormal
/// columns. Convergence: off-diagonal Frobenius norm below `1e-12 * ||M||_F`,
/// capped at 100 sweeps.
pub fn sym_eig_topk(m: &[Vec<f64>], k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = m.len();
    if d == 0 || m.iter().any(|row| row.len() != d) {
        return Err(Error::dimension("matrix must be square"));
    }
    if k < 1 || k > d {
        return Err(Error::dimension(format!("need 1 <= k <= d, got k={k}, d={d}")));
    }
    let scale = frobenius(m).max(1.0);
    for i in 0..d {
        for j in (i + 1)..d {
            if (m[i][j] - m[j][i]).abs() > 1e-8 * scale {
                return Err(Error::domain("matrix is not symmetric"));
            }
        }
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    // symmetrize exactly so rotations preserve symmetry
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = avg;
            a[j][i] = avg;
        }
    }
    let mut v = identity(d);
    let norm = frobenius(&a);
    let tol = 1e-12 * norm;
    for _sweep in 0..100 {
        if off_diag_norm(&a) <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p][q];
                if apq.abs() <= tol / (d as f64) {
                    continue;
                }
                // rotation angle annihilating a[p][q]
                let theta = 0.5 * (a[q][q] - a[p][p]) / apq;
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..d {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..d {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let eigenvalues: Vec<f64> = order.iter().take(k).map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .take(k)
        .map(|&j| (0..d).map(|i| v[i][j]).collect())
        .collect();
    Ok((eigenvalues, vectors))
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    v
}

fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diag_norm(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += m[i][j] * m[i][j];
            }
        }
    }
    acc.sqrt()
}
