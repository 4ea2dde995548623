//! Dataset container, LIBSVM text I/O and a synthetic Gaussian-mixture generator.
//!
//! Samples are stored row-contiguous (one row per sample) with a constant-1
//! intercept coordinate appended as the last column, so mini-batch gathers and
//! dot products read contiguous memory. Labels are restricted to {+1, -1}.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Immutable training set: features with appended intercept, labels in
/// {+1, -1} and per-sample positive weights summing over each class as the
/// weighting scheme dictates (uniform 1/n by default).
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<f64>,
    weights: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from raw features (one row per sample, no intercept)
    /// and labels. Appends the constant-1 intercept column and assigns
    /// uniform weights 1/n.
    pub fn from_parts(raw: Array2<f64>, labels: Vec<f64>) -> Result<Self> {
        let n = raw.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: labels.len(),
            });
        }
        for (i, &y) in labels.iter().enumerate() {
            if y != 1.0 && y != -1.0 {
                return Err(Error::InvalidArgument(format!(
                    "label {y} at sample {i} is outside {{+1, -1}}"
                )));
            }
        }
        for (i, v) in raw.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite feature value at flat index {i}"
                )));
            }
        }
        let d_raw = raw.ncols();
        let mut features = Array2::<f64>::zeros((n, d_raw + 1));
        features
            .slice_mut(ndarray::s![.., ..d_raw])
            .assign(&raw);
        features.column_mut(d_raw).fill(1.0);
        let weights = vec![1.0 / n as f64; n];
        Ok(Dataset {
            features,
            labels,
            weights,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension including the appended intercept coordinate.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Sample i as a contiguous view of length `dim()` (intercept last).
    pub fn sample(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Full feature matrix, one sample per row, intercept in the last column.
    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    /// Sum of all sample weights (1 for uniform weighting, 2 when both
    /// classes are reweighted to unit mass).
    pub fn weight_total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Returns a copy of this dataset carrying the given weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample weights must be positive and finite, got {w}"
            )));
        }
        Ok(Dataset {
            features: self.features.clone(),
            labels: self.labels.clone(),
            weights,
        })
    }

    /// Returns a copy with inverse-class-frequency weights: every positive
    /// sample gets 1/|Y+| and every negative 1/|Y-|, so each class carries
    /// total mass 1.
    pub fn with_class_weights(&self) -> Result<Self> {
        let weights = class_weights(&self.labels)?;
        self.with_weights(weights)
    }

    /// Returns a copy with every raw feature vector scaled to unit Euclidean
    /// norm. The intercept coordinate stays 1; all-zero samples are left
    /// unchanged.
    pub fn unit_normalized(&self) -> Self {
        let mut features = self.features.clone();
        let d_raw = self.dim() - 1;
        for mut row in features.rows_mut() {
            let norm = row
                .slice(ndarray::s![..d_raw])
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for r in 0..d_raw {
                    row[r] /= norm;
                }
            }
        }
        Dataset {
            features,
            labels: self.labels.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Weighted sum of feature vectors over one class, accumulated in
    /// ascending sample order. The per-component product weight * x is rounded
    /// before each addition; gradient assembly relies on this exact order.
    pub fn weighted_label_sum(&self, positive: bool) -> Array1<f64> {
        let d = self.dim();
        let mut acc = Array1::<f64>::zeros(d);
        for i in 0..self.len() {
            let matches = (self.labels[i] > 0.0) == positive;
            if !matches {
                continue;
            }
            let w = self.weights[i];
            let x = self.sample(i);
            for r in 0..d {
                acc[r] += w * x[r];
            }
        }
        acc
    }

    /// Splits off the last `count` samples into a second dataset. Both halves
    /// get fresh uniform weights; reapply any custom weighting afterwards.
    pub fn split_tail(&self, count: usize) -> Result<(Dataset, Dataset)> {
        let n = self.len();
        if count == 0 || count >= n {
            return Err(Error::InvalidArgument(format!(
                "split size {count} must be in 1..{n}"
            )));
        }
        let head = n - count;
        let take = |lo: usize, hi: usize| -> Result<Dataset> {
            let d_raw = self.dim() - 1;
            let raw = self
                .features
                .slice(ndarray::s![lo..hi, ..d_raw])
                .to_owned();
            Dataset::from_parts(raw, self.labels[lo..hi].to_vec())
        };
        Ok((take(0, head)?, take(head, n)?))
    }
}

/// Inverse-class-frequency weights for labels in {+1, -1}: each class is
/// scaled to total mass 1. Errors when a class is absent.
pub fn class_weights(labels: &[f64]) -> Result<Vec<f64>> {
    let pos = labels.iter().filter(|y| **y > 0.0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument(
            "class weighting needs both classes present".into(),
        ));
    }
    Ok(labels
        .iter()
        .map(|y| {
            if *y > 0.0 {
                1.0 / pos as f64
            } else {
                1.0 / neg as f64
            }
        })
        .collect())
}

/// Reads a dataset in LIBSVM text format: one sample per line,
/// `label index:value ...` with 1-based strictly ascending indices.
/// Dimensionality is the largest index seen; missing entries are zero.
/// The intercept coordinate is appended after reading.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text, &path.display().to_string())
}

fn parse_libsvm(text: &str, origin: &str) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d_raw = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let loc = format!("{origin}:{}", lineno + 1);
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label_tok = parts.next().expect("non-empty line has a first token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| Error::parse(&loc, format!("bad label {label_tok:?}")))?;
        if label != 1.0 && label != -1.0 {
            return Err(Error::parse(&loc, format!("label {label} not in {{+1, -1}}")));
        }
        let mut entries = Vec::new();
        let mut last_idx = 0usize;
        for tok in parts {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(&loc, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| Error::parse(&loc, format!("bad feature index {idx_s:?}")))?;
            let val: f64 = val_s
                .parse()
                .map_err(|_| Error::parse(&loc, format!("bad feature value {val_s:?}")))?;
            if idx == 0 {
                return Err(Error::parse(&loc, "feature indices are 1-based"));
            }
            if idx <= last_idx {
                return Err(Error::parse(
                    &loc,
                    format!("feature index {idx} not strictly ascending"),
                ));
            }
            if !val.is_finite() {
                return Err(Error::parse(&loc, format!("non-finite feature value {val}")));
            }
            last_idx = idx;
            entries.push((idx - 1, val));
        }
        d_raw = d_raw.max(last_idx);
        labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::parse(origin, "no samples in file"));
    }
    let mut raw = Array2::<f64>::zeros((rows.len(), d_raw));
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            raw[[i, j]] = v;
        }
    }
    Dataset::from_parts(raw, labels)
}

/// Writes a dataset in LIBSVM format. Every raw coordinate is written
/// (including zeros) so that dimensionality and values reload exactly;
/// the intercept column is not serialized. Weights are not serialized.
pub fn write_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let d_raw = ds.dim() - 1;
    for i in 0..ds.len() {
        let label = if ds.label(i) > 0.0 { "+1" } else { "-1" };
        out.push_str(label);
        let x = ds.sample(i);
        for j in 0..d_raw {
            write!(out, " {}:{}", j + 1, x[j]).expect("string write cannot fail");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parameters for [`synth_gaussian`].
#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub separation: f64,
    pub seed: u64,
}

/// Generates a Gaussian-mixture dataset: `clusters` unit-variance isotropic
/// components whose means are drawn with RMS pairwise distance `separation`,
/// samples assigned round-robin, labels by cluster parity (even clusters
/// positive). Deterministic in `seed`.
pub fn synth_gaussian(spec: SynthSpec) -> Result<Dataset> {
    let SynthSpec {
        n,
        d,
        clusters,
        separation,
        seed,
    } = spec;
    if n == 0 || d == 0 || clusters == 0 {
        return Err(Error::InvalidArgument(
            "synthetic spec needs n, d and clusters all positive".into(),
        ));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "separation must be finite and non-negative, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mean_scale = separation / (2.0 * d as f64).sqrt();
    let mut means = Array2::<f64>::zeros((clusters, d));
    for v in means.iter_mut() {
        let z: f64 = normal.sample(&mut rng);
        *v = mean_scale * z;
    }
    let mut raw = Array2::<f64>::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % clusters;
        for j in 0..d {
            let z: f64 = normal.sample(&mut rng);
            raw[[i, j]] = means[[c, j]] + z;
        }
        labels.push(if c % 2 == 0 { 1.0 } else { -1.0 });
    }
    Dataset::from_parts(raw, labels)
}
