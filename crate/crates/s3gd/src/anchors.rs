//! Anchor selection pipeline: k-means clustering, snapping centers to real
//! samples, the sparse anchor-sample affinity graph, and the propagation
//! cache that lets the anchored full gradient be assembled in O(m d).

use ndarray::{Array1, Array2, ArrayView1};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Distance floor for the per-sample bandwidth sigma.
pub const SIGMA_EPSILON: f64 = 1e-4;

/// How the per-sample bandwidth is derived from the nearest-anchor distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaRule {
    /// sigma_i = max(epsilon, sqrt(min_j ||x_i - z_j||)), the square root of
    /// the Euclidean distance itself.
    AsPrinted,
    /// sigma_i = max(epsilon, min_j ||x_i - z_j||).
    Unrooted,
}

impl SigmaRule {
    pub fn name(&self) -> &'static str {
        match self {
            SigmaRule::AsPrinted => "as-printed",
            SigmaRule::Unrooted => "unrooted",
        }
    }
}

/// Result of Lloyd's algorithm with k-means++ style seeding.
#[derive(Debug, Clone)]
pub struct KmeansResult {
    /// One row per center.
    pub centers: Array2<f64>,
    /// Cluster index per point.
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after each update step (non-increasing).
    pub wcss_history: Vec<f64>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Lloyd's k-means over the rows of `points`, deterministic in `rng`.
/// Ties in assignment go to the lowest center index; empty clusters are
/// re-seeded from the point currently farthest from its assigned center.
pub fn kmeans(
    points: &Array2<f64>,
    m: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> Result<KmeansResult> {
    let n = points.nrows();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {m} must be in 1..={n}"
        )));
    }
    let d = points.ncols();

    // Distance-weighted seeding: each next center is drawn proportionally to
    // the squared distance from the already-chosen ones.
    let mut centers = Array2::<f64>::zeros((m, d));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut min_sq: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), centers.row(0))).collect();
    for c in 1..m {
        let total: f64 = min_sq.iter().sum();
        let idx = if total > 0.0 {
            let dist = WeightedIndex::new(&min_sq)
                .map_err(|e| Error::InvalidArgument(format!("seeding weights: {e}")))?;
            dist.sample(rng)
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&points.row(idx));
        for i in 0..n {
            min_sq[i] = min_sq[i].min(sq_dist(points.row(i), centers.row(c)));
        }
    }

    let mut assignments = vec![0usize; n];
    let mut wcss_history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for c in 0..m {
                let dd = sq_dist(points.row(i), centers.row(c));
                if dd < best_d {
                    best_d = dd;
                    best = c;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }

        let mut counts = vec![0usize; m];
        let mut sums = Array2::<f64>::zeros((m, d));
        for i in 0..n {
            counts[assignments[i]] += 1;
            let mut row = sums.row_mut(assignments[i]);
            row += &points.row(i);
        }
        for c in 0..m {
            if counts[c] > 0 {
                let mut row = centers.row_mut(c);
                row.assign(&sums.row(c));
                row /= counts[c] as f64;
            } else {
                // Re-seed from the point farthest from its current center.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(points.row(a), centers.row(assignments[a]));
                        let db = sq_dist(points.row(b), centers.row(assignments[b]));
                        da.partial_cmp(&db).expect("finite distances")
                    })
                    .expect("n > 0");
                centers.row_mut(c).assign(&points.row(far));
                assignments[far] = c;
                changed = true;
            }
        }

        let wcss: f64 = (0..n)
            .map(|i| sq_dist(points.row(i), centers.row(assignments[i])))
            .sum();
        wcss_history.push(wcss);
        if !changed {
            break;
        }
    }

    Ok(KmeansResult {
        centers,
        assignments,
        wcss_history,
    })
}

/// Anchor points: real samples nearest to the k-means centers.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    vectors: Array2<f64>,
    source_indices: Vec<usize>,
}

impl AnchorSet {
    pub fn m(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Anchor j as a contiguous view (same layout as dataset samples).
    pub fn vector(&self, j: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(j)
    }

    /// Index of the dataset sample each anchor is a copy of.
    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// Builds the identity anchor set where every sample is its own anchor.
    /// Combined with k = 1 this makes the anchored pathway reproduce the
    /// exact gradient.
    pub fn all_samples(ds: &Dataset) -> Self {
        let mut vectors = Array2::<f64>::zeros((ds.len(), ds.dim()));
        for i in 0..ds.len() {
            vectors.row_mut(i).assign(&ds.sample(i));
        }
        AnchorSet {
            vectors,
            source_indices: (0..ds.len()).collect(),
        }
    }
}

/// Snaps each center to the nearest dataset sample (ties to the lowest sample
/// index; duplicates resolved to the next-nearest unused sample) so anchors
/// are always real samples.
pub fn select_anchors(ds: &Dataset, centers: &Array2<f64>) -> Result<AnchorSet> {
    let m = centers.nrows();
    let n = ds.len();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "anchor count {m} must be in 1..={n}"
        )));
    }
    if centers.ncols() != ds.dim() {
        return Err(Error::Dimension {
            expected: ds.dim(),
            got: centers.ncols(),
        });
    }
    let mut used = vec![false; n];
    let mut source_indices = Vec::with_capacity(m);
    for c in 0..m {
        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|i| (sq_dist(ds.sample(i), centers.row(c)), i))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let pick = order
            .iter()
            .find(|(_, i)| !used[*i])
            .expect("m <= n leaves an unused sample")
            .1;
        used[pick] = true;
        source_indices.push(pick);
    }
    let mut vectors = Array2::<f64>::zeros((m, ds.dim()));
    for (j, &i) in source_indices.iter().enumerate() {
        vectors.row_mut(j).assign(&ds.sample(i));
    }
    Ok(AnchorSet {
        vectors,
        source_indices,
    })
}

/// Sparse affinity graph: each sample holds its k nearest anchors and the
/// normalized Gaussian weights gamma over them (each row sums to 1).
#[derive(Debug, Clone)]
pub struct AnchorSampleGraph {
    n: usize,
    m: usize,
    k: usize,
    /// Flattened (n, k): anchor indices per sample, nearest first.
    neighbors: Vec<usize>,
    /// Flattened (n, k): normalized weights aligned with `neighbors`.
    gammas: Vec<f64>,
}

impl AnchorSampleGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Anchor indices for sample i, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    /// Normalized weights for sample i, aligned with `neighbors(i)`.
    pub fn gammas(&self, i: usize) -> &[f64] {
        &self.gammas[i * self.k..(i + 1) * self.k]
    }

    /// Number of structurally nonzero entries (n * k).
    pub fn nnz(&self) -> usize {
        self.neighbors.len()
    }
}

/// Builds the anchor-sample graph: per sample, the k nearest anchors by
/// Euclidean distance (ties to the lowest anchor index), bandwidth
/// sigma_i = max(epsilon, .) per `rule`, and normalized weights
/// gamma_j = exp(-||x_i - z_j||^2 / sigma_i^2) / sum. The exponents are
/// shifted by the smallest distance before exponentiation; the normalized
/// weights are identical and stay finite for tiny sigma.
pub fn build_asg(
    ds: &Dataset,
    anchors: &AnchorSet,
    k: usize,
    rule: SigmaRule,
) -> Result<AnchorSampleGraph> {
    let n = ds.len();
    let m = anchors.m();
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "neighbor count {k} must be in 1..={m}"
        )));
    }
    if anchors.dim() != ds.dim() {
        return Err(Error::Dimension {
            expected: ds.dim(),
            got: anchors.dim(),
        });
    }
    let mut neighbors = Vec::with_capacity(n * k);
    let mut gammas = Vec::with_capacity(n * k);
    for i in 0..n {
        let mut order: Vec<(f64, usize)> = (0..m)
            .map(|j| (sq_dist(ds.sample(i), anchors.vector(j)), j))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        order.truncate(k);

        let min_norm = order[0].0.sqrt();
        let sigma = match rule {
            SigmaRule::AsPrinted => min_norm.sqrt().max(SIGMA_EPSILON),
            SigmaRule::Unrooted => min_norm.max(SIGMA_EPSILON),
        };
        let inv_s2 = 1.0 / (sigma * sigma);
        let shift = order[0].0;
        let raw: Vec<f64> = order
            .iter()
            .map(|(sq, _)| (-(sq - shift) * inv_s2).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        for ((_, j), g) in order.iter().zip(raw.iter()) {
            neighbors.push(*j);
            gammas.push(g / total);
        }
    }
    Ok(AnchorSampleGraph {
        n,
        m,
        k,
        neighbors,
        gammas,
    })
}

/// Dataset-level terms reused by every anchored full-gradient evaluation:
/// per-anchor weighted feature sums split by label class, plus the constant
/// negative-class correction.
#[derive(Debug, Clone)]
pub struct PropagationCache {
    m: usize,
    dim: usize,
    /// Row j: sum over positive samples of weight_i gamma_ij x_i.
    xm_pos: Array2<f64>,
    /// Row j: the same sum over negative samples.
    xm_neg: Array2<f64>,
    /// Sum over negative samples of weight_i (-x_i).
    neg_correction: Array1<f64>,
}

impl PropagationCache {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xm_pos(&self) -> &Array2<f64> {
        &self.xm_pos
    }

    pub fn xm_neg(&self) -> &Array2<f64> {
        &self.xm_neg
    }

    pub fn neg_correction(&self) -> &Array1<f64> {
        &self.neg_correction
    }
}

/// Precomputes the weighted anchor aggregation. Cost O(n k d); afterwards an
/// anchored full gradient is O(m d) given the anchor derivatives.
pub fn precompute_propagation(ds: &Dataset, asg: &AnchorSampleGraph) -> Result<PropagationCache> {
    if asg.n() != ds.len() {
        return Err(Error::Dimension {
            expected: ds.len(),
            got: asg.n(),
        });
    }
    let d = ds.dim();
    let m = asg.m();
    let mut xm_pos = Array2::<f64>::zeros((m, d));
    let mut xm_neg = Array2::<f64>::zeros((m, d));
    for i in 0..ds.len() {
        let positive = ds.label(i) > 0.0;
        let w = ds.weight(i);
        let x = ds.sample(i);
        let target = if positive { &mut xm_pos } else { &mut xm_neg };
        for (&j, &g) in asg.neighbors(i).iter().zip(asg.gammas(i)) {
            let coeff = w * g;
            let mut row = target.row_mut(j);
            for r in 0..d {
                row[r] += coeff * x[r];
            }
        }
    }
    let neg_correction = ds.weighted_label_sum(false).map(|v| -v);
    Ok(PropagationCache {
        m,
        dim: d,
        xm_pos,
        xm_neg,
        neg_correction,
    })
}
