//! Dataset container, seeded synthetic generators and CSV ingestion.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inlier/outlier tag for generated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointLabel {
    Inlier,
    Outlier,
}

/// n points in R^d with optional inlier/outlier tags and optional class
/// labels carried over from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    labels: Option<Vec<PointLabel>>,
    classes: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_labels(points, None, None)
    }

    pub fn with_labels(
        points: Vec<Vec<f64>>,
        labels: Option<Vec<PointLabel>>,
        classes: Option<Vec<String>>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("dataset must be nonempty"));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::dimension("points have mixed or zero dimensions"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("coordinates must be finite"));
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::domain("label length does not match data"));
            }
        }
        if let Some(c) = &classes {
            if c.len() != points.len() {
                return Err(Error::domain("class length does not match data"));
            }
        }
        Ok(Dataset { points, labels, classes })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[PointLabel]> {
        self.labels.as_deref()
    }

    pub fn classes(&self) -> Option<&[String]> {
        self.classes.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Subset by indices, carrying labels and classes along.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        let classes = self
            .classes
            .as_ref()
            .map(|c| indices.iter().map(|&i| c[i].clone()).collect());
        Dataset::with_labels(points, labels, classes)
    }

    /// Points tagged inlier, or all points when untagged.
    pub fn inliers(&self) -> Result<Dataset> {
        match &self.labels {
            None => Ok(self.clone()),
            Some(l) => {
                let idx: Vec<usize> = l
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| **t == PointLabel::Inlier)
                    .map(|(i, _)| i)
                    .collect();
                self.select(&idx)
            }
        }
    }

    /// Write as CSV, with a trailing label column when tags are present.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            let coords: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            let mut line = coords.join(",");
            if let Some(l) = &self.labels {
                line.push(',');
                line.push_str(match l[i] {
                    PointLabel::Inlier => "inlier",
                    PointLabel::Outlier => "outlier",
                });
            } else if let Some(c) = &self.classes {
                line.push(',');
                line.push_str(&c[i]);
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// One isotropic Gaussian component, truncated at three standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub variance: f64,
    pub count: usize,
}

/// Mixture of inlier and outlier Gaussian components; the mixture fraction is
/// implied by the counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub inliers: Vec<GaussianComponent>,
    pub outliers: Vec<GaussianComponent>,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        for c in self.inliers.iter().chain(&self.outliers) {
            if !(c.variance > 0.0) {
                return Err(Error::domain("component variance must be positive"));
            }
            if c.mean.is_empty() {
                return Err(Error::domain("component mean must be nonempty"));
            }
        }
        if self.inliers.iter().chain(&self.outliers).map(|c| c.count).sum::<usize>() == 0 {
            return Err(Error::domain("mixture must generate at least one point"));
        }
        Ok(())
    }

    /// Three clusters of 100 points each (variance 0.1 at (-3,0), (0,1),
    /// (3,0)) plus 100 outliers at (-1,-5) with variance 5.
    pub fn synthetic_clusters() -> Self {
        let inlier = |mean: Vec<f64>| GaussianComponent { mean, variance: 0.1, count: 100 };
        MixtureSpec {
            inliers: vec![
                inlier(vec![-3.0, 0.0]),
                inlier(vec![0.0, 1.0]),
                inlier(vec![3.0, 0.0]),
            ],
            outliers: vec![GaussianComponent {
                mean: vec![-1.0, -5.0],
                variance: 5.0,
                count: 100,
            }],
        }
    }
}

/// Deterministic RNG for a master seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream for restart/replication `index` of a master seed.
pub fn rng_substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&index.to_le_bytes());
    bytes[16] = 0x5c;
    ChaCha8Rng::from_seed(bytes)
}

fn sample_truncated_gaussian<R: Rng>(c: &GaussianComponent, rng: &mut R) -> Vec<f64> {
    let sigma = c.variance.sqrt();
    let radius = 3.0 * sigma;
    loop {
        let x: Vec<f64> = c
            .mean
            .iter()
            .map(|m| m + sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        let r2: f64 = x
            .iter()
            .zip(&c.mean)
            .map(|(a, m)| (a - m) * (a - m))
            .sum();
        if r2 <= radius * radius {
            return x;
        }
    }
}

/// Draw the mixture: inlier components first, then outliers, each component's
/// points in sequence. Deterministic per seed.
pub fn gen_clusters_with_outliers(spec: &MixtureSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for c in &spec.inliers {
        for _ in 0..c.count {
            points.push(sample_truncated_gaussian(c, &mut rng));
            labels.push(PointLabel::Inlier);
        }
    }
    for c in &spec.outliers {
        for _ in 0..c.count {
            points.push(sample_truncated_gaussian(c, &mut rng));
            labels.push(PointLabel::Outlier);
        }
    }
    Dataset::with_labels(points, Some(labels), None)
}

/// 50 inliers uniform on `[-1,1] x [-0.1, 0.1]` plus 50 outliers uniform on
/// the top-right/bottom-left open orthants intersected with the unit disk.
pub fn gen_psa_strip(seed: u64) -> Result<Dataset> {
    let mut rng = rng_from_seed(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..50 {
        points.push(vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-0.1..=0.1)]);
        labels.push(PointLabel::Inlier);
    }
    let mut drawn = 0;
    while drawn < 50 {
        let x: f64 = rng.gen_range(-1.0..=1.0);
        let y: f64 = rng.gen_range(-1.0..=1.0);
        let same_sign = (x > 0.0 && y > 0.0) || (x < 0.0 && y < 0.0);
        if same_sign && x * x + y * y <= 1.0 {
            points.push(vec![x, y]);
            labels.push(PointLabel::Outlier);
            drawn += 1;
        }
    }
    Dataset::with_labels(points, Some(labels), None)
}

/// Parse a rectangular numeric CSV; the last column may hold class labels.
pub fn load_csv(path: &Path, has_header: bool, has_label_column: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut points = Vec::new();
    let mut classes = Vec::new();
    let mut width = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let row = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        if has_header && lineno == 0 {
            continue;
        }
        let mut cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let class = if has_label_column {
            Some(cells.pop().ok_or_else(|| Error::Parse {
                row,
                msg: "missing label column".into(),
            })?)
        } else {
            None
        };
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::Parse {
                    row,
                    msg: format!("ragged row: expected {w} columns, found {}", cells.len()),
                })
            }
            _ => {}
        }
        let coords: Vec<f64> = cells
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    msg: format!("non-numeric cell {c:?}"),
                })
            })
            .collect::<Result<_>>()?;
        points.push(coords);
        if let Some(c) = class {
            classes.push(c.to_string());
        }
    }
    if points.is_empty() {
        return Err(Error::Parse { row: 0, msg: "empty file".into() });
    }
    let classes = if has_label_column { Some(classes) } else { None };
    Dataset::with_labels(points, None, classes)
}

/// Seeded inlier/outlier subsample of a class-labeled dataset.
///
/// Draws `n_in_per_class` points from each class in `inlier_classes` (tagged
/// inlier) and `n_out_per_class` from every other class (tagged outlier),
/// without replacement. The test set is all remaining points of the inlier
/// classes.
pub fn subsample_protocol(
    dataset: &Dataset,
    inlier_classes: &[String],
    n_in_per_class: usize,
    n_out_per_class: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let classes = dataset
        .classes()
        .ok_or_else(|| Error::domain("subsample protocol needs class labels"))?;
    let mut distinct: Vec<String> = Vec::new();
    for c in classes {
        if !distinct.contains(c) {
            distinct.push(c.clone());
        }
    }
    for want in inlier_classes {
        if !distinct.contains(want) {
            return Err(Error::domain(format!("unknown inlier class {want:?}")));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut train_idx = Vec::new();
    let mut train_labels = Vec::new();
    let mut test_idx = Vec::new();
    for class in &distinct {
        let mut members: Vec<usize> = classes
            .iter()
            .enumerate()
            .filter(|(_, c)| *c == class)
            .map(|(i, _)| i)
            .collect();
        let is_inlier = inlier_classes.contains(class);
        let want = if is_inlier { n_in_per_class } else { n_out_per_class };
        if members.len() < want {
            return Err(Error::domain(format!(
                "class {class:?} has {} points, need {want}",
                members.len()
            )));
        }
        // partial Fisher-Yates draw without replacement
        for j in 0..want {
            let pick = rng.gen_range(j..members.len());
            members.swap(j, pick);
        }
        train_idx.extend_from_slice(&members[..want]);
        train_labels.extend(std::iter::repeat(if is_inlier {
            PointLabel::Inlier
        } else {
            PointLabel::Outlier
        })
        .take(want));
        if is_inlier {
            test_idx.extend_from_slice(&members[want..]);
        }
    }
    if test_idx.is_empty() {
        return Err(Error::domain("no points left for the test set"));
    }
    let train_points = train_idx.iter().map(|&i| dataset.points[i].clone()).collect();
    let train_classes = train_idx.iter().map(|&i| classes[i].clone()).collect();
    let train = Dataset::with_labels(train_points, Some(train_labels), Some(train_classes))?;
    let test = dataset.select(&test_idx)?;
    Ok((train, test))
}
