//! Exact, mini-batch and anchor-approximated gradients of the weighted
//! smooth part P(w) = sum_i weight_i psi(w'x_i; y_i).
//!
//! Every assembly routine here follows one canonical operation order: per
//! sample, add sign * (scalar * (coeff * x_i)) component-wise, then add the
//! constant negative-class term as a separate vector. The propagation-cache
//! pathway mirrors that order anchor by anchor, which is what makes the
//! anchored gradient coincide bit-for-bit with the exact one when every
//! sample is its own anchor (k = 1).

use ndarray::Array1;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::anchors::{kmeans, AnchorSampleGraph, AnchorSet, PropagationCache};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::Loss;

/// Case-split derivative scalars at the anchor points: case1 backs positive
/// labels (psi' = -case1), case2 backs negative labels
/// (psi' = a*case2 + b). For the logistic loss the two coincide.
#[derive(Debug, Clone)]
pub struct AnchorDerivatives {
    case1: Array1<f64>,
    case2: Array1<f64>,
    neg_affine: (f64, f64),
}

impl AnchorDerivatives {
    pub fn m(&self) -> usize {
        self.case1.len()
    }

    /// The positive-case scalar vector (sigma(-w'z_j) for logistic).
    pub fn case1(&self) -> &Array1<f64> {
        &self.case1
    }

    /// The negative-case scalar vector.
    pub fn case2(&self) -> &Array1<f64> {
        &self.case2
    }
}

/// Evaluates both per-case derivative scalars at every anchor, O(m d).
pub fn anchor_derivatives(w: &Array1<f64>, anchors: &AnchorSet, loss: &Loss) -> Result<AnchorDerivatives> {
    if w.len() != anchors.dim() {
        return Err(Error::Dimension {
            expected: anchors.dim(),
            got: w.len(),
        });
    }
    let m = anchors.m();
    let mut case1 = Array1::<f64>::zeros(m);
    let mut case2 = Array1::<f64>::zeros(m);
    for j in 0..m {
        let u = w.dot(&anchors.vector(j));
        case1[j] = loss.case1_scalar(u);
        case2[j] = loss.case2_scalar(u);
    }
    Ok(AnchorDerivatives {
        case1,
        case2,
        neg_affine: loss.neg_affine(),
    })
}

/// Canonical accumulation: items are (sample index, coefficient, case
/// scalar), already sorted by sample index. Adds
/// sign_y * (scalar * (coeff * x_i)) per component, then the b-weighted
/// negative-class vector.
pub(crate) fn accumulate_case_sum(
    ds: &Dataset,
    items: &[(usize, f64, f64)],
    loss: &Loss,
) -> Array1<f64> {
    let d = ds.dim();
    let (a_neg, b_neg) = loss.neg_affine();
    let mut acc = Array1::<f64>::zeros(d);
    for &(i, coeff, s) in items {
        let sign = if ds.label(i) > 0.0 { -1.0 } else { a_neg };
        let x = ds.sample(i);
        for r in 0..d {
            acc[r] += sign * (s * (coeff * x[r]));
        }
    }
    if b_neg != 0.0 {
        let mut bv = Array1::<f64>::zeros(d);
        for &(i, coeff, _) in items {
            if ds.label(i) < 0.0 {
                let x = ds.sample(i);
                for r in 0..d {
                    bv[r] += coeff * x[r];
                }
            }
        }
        for r in 0..d {
            acc[r] += b_neg * bv[r];
        }
    }
    acc
}

pub(crate) fn exact_case_scalar(w: &Array1<f64>, ds: &Dataset, loss: &Loss, i: usize) -> f64 {
    let u = w.dot(&ds.sample(i));
    if ds.label(i) > 0.0 {
        loss.case1_scalar(u)
    } else {
        loss.case2_scalar(u)
    }
}

/// Exact weighted gradient of the smooth part, O(n d).
pub fn full_gradient(w: &Array1<f64>, ds: &Dataset, loss: &Loss) -> Result<Array1<f64>> {
    if w.len() != ds.dim() {
        return Err(Error::Dimension {
            expected: ds.dim(),
            got: w.len(),
        });
    }
    let items: Vec<(usize, f64, f64)> = (0..ds.len())
        .map(|i| (i, ds.weight(i), exact_case_scalar(w, ds, loss, i)))
        .collect();
    Ok(accumulate_case_sum(ds, &items, loss))
}

/// Draws p distinct indices uniformly without replacement, returned in
/// ascending order.
pub fn sample_minibatch(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if p == 0 || p > n {
        return Err(Error::InvalidArgument(format!(
            "mini-batch size {p} must be in 1..={n}"
        )));
    }
    let mut idx = rand::seq::index::sample(rng, n, p).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

fn check_batch(ds: &Dataset, batch: &[usize]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty mini-batch".into()));
    }
    if let Some(&i) = batch.iter().find(|i| **i >= ds.len()) {
        return Err(Error::InvalidArgument(format!(
            "mini-batch index {i} out of range for {} samples",
            ds.len()
        )));
    }
    Ok(())
}

fn sorted_batch(batch: &[usize]) -> Vec<usize> {
    let mut sorted = batch.to_vec();
    sorted.sort_unstable();
    sorted
}

/// Unbiased mini-batch estimator of the exact gradient under uniform
/// sampling without replacement: (n/p) sum_{i in I} weight_i grad psi_i(w).
/// Invariant to the ordering of `batch`; with I = {0..n} it reproduces
/// `full_gradient` exactly.
pub fn minibatch_gradient(
    w: &Array1<f64>,
    batch: &[usize],
    ds: &Dataset,
    loss: &Loss,
) -> Result<Array1<f64>> {
    if w.len() != ds.dim() {
        return Err(Error::Dimension {
            expected: ds.dim(),
            got: w.len(),
        });
    }
    check_batch(ds, batch)?;
    let scale = ds.len() as f64 / batch.len() as f64;
    let items: Vec<(usize, f64, f64)> = sorted_batch(batch)
        .into_iter()
        .map(|i| (i, scale * ds.weight(i), exact_case_scalar(w, ds, loss, i)))
        .collect();
    Ok(accumulate_case_sum(ds, &items, loss))
}

/// Interpolated case scalar for sample i from the anchor derivatives matching
/// its own label case.
fn interpolated_scalar(
    ds: &Dataset,
    asg: &AnchorSampleGraph,
    derivs: &AnchorDerivatives,
    i: usize,
) -> f64 {
    let vals = if ds.label(i) > 0.0 {
        &derivs.case1
    } else {
        &derivs.case2
    };
    let mut s = 0.0;
    for (&j, &g) in asg.neighbors(i).iter().zip(asg.gammas(i)) {
        s += g * vals[j];
    }
    s
}

/// Anchored approximation of one sample gradient:
/// grad h_i(w) = psi_hat'(w; x_i, y_i) x_i, with the derivative scalar
/// interpolated from the k nearest anchors. The anchor derivatives must have
/// been evaluated at the same w.
pub fn approx_sample_gradient(
    ds: &Dataset,
    asg: &AnchorSampleGraph,
    derivs: &AnchorDerivatives,
    i: usize,
) -> Result<Array1<f64>> {
    if asg.m() != derivs.m() {
        return Err(Error::Dimension {
            expected: asg.m(),
            got: derivs.m(),
        });
    }
    if i >= ds.len() {
        return Err(Error::InvalidArgument(format!(
            "sample index {i} out of range for {} samples",
            ds.len()
        )));
    }
    let s = interpolated_scalar(ds, asg, derivs, i);
    let (a_neg, b_neg) = derivs.neg_affine;
    let positive = ds.label(i) > 0.0;
    let sign = if positive { -1.0 } else { a_neg };
    let x = ds.sample(i);
    let mut out = Array1::<f64>::zeros(ds.dim());
    for r in 0..ds.dim() {
        out[r] = sign * (s * x[r]);
    }
    if !positive && b_neg != 0.0 {
        for r in 0..ds.dim() {
            out[r] += b_neg * x[r];
        }
    }
    Ok(out)
}

/// Anchored full gradient assembled from the propagation cache in O(m d):
/// the per-anchor products against both class aggregates plus the constant
/// negative-class correction. Mirrors the exact assembly order.
pub fn approx_full_gradient(
    cache: &PropagationCache,
    derivs: &AnchorDerivatives,
) -> Result<Array1<f64>> {
    if cache.m() != derivs.m() {
        return Err(Error::Dimension {
            expected: cache.m(),
            got: derivs.m(),
        });
    }
    let d = cache.dim();
    let (a_neg, b_neg) = derivs.neg_affine;
    let mut acc = Array1::<f64>::zeros(d);
    for j in 0..cache.m() {
        let d1 = derivs.case1[j];
        let d2 = derivs.case2[j];
        let pos = cache.xm_pos().row(j);
        let neg = cache.xm_neg().row(j);
        for r in 0..d {
            acc[r] += -(d1 * pos[r]);
            acc[r] += a_neg * (d2 * neg[r]);
        }
    }
    if b_neg != 0.0 {
        let nc = cache.neg_correction();
        for r in 0..d {
            acc[r] += b_neg * -nc[r];
        }
    }
    Ok(acc)
}

/// Mini-batch of anchored sample gradients with the without-replacement
/// scaling, the inner-loop correction term of the semi-stochastic estimator.
pub fn approx_minibatch_gradient(
    batch: &[usize],
    ds: &Dataset,
    asg: &AnchorSampleGraph,
    derivs: &AnchorDerivatives,
    loss: &Loss,
) -> Result<Array1<f64>> {
    if asg.m() != derivs.m() {
        return Err(Error::Dimension {
            expected: asg.m(),
            got: derivs.m(),
        });
    }
    check_batch(ds, batch)?;
    let scale = ds.len() as f64 / batch.len() as f64;
    let items: Vec<(usize, f64, f64)> = sorted_batch(batch)
        .into_iter()
        .map(|i| {
            (
                i,
                scale * ds.weight(i),
                interpolated_scalar(ds, asg, derivs, i),
            )
        })
        .collect();
    Ok(accumulate_case_sum(ds, &items, loss))
}

/// Snapshot taken at the start of an outer loop: the reference point, its
/// anchored full gradient and the anchor derivatives needed to rebuild the
/// per-sample corrections.
#[derive(Debug, Clone)]
pub struct GradientSnapshot {
    pub w_tilde: Array1<f64>,
    pub h_grad: Array1<f64>,
    pub anchor_derivs: AnchorDerivatives,
}

impl GradientSnapshot {
    pub fn new(
        w_tilde: Array1<f64>,
        anchors: &AnchorSet,
        cache: &PropagationCache,
        loss: &Loss,
    ) -> Result<Self> {
        let anchor_derivs = anchor_derivatives(&w_tilde, anchors, loss)?;
        let h_grad = approx_full_gradient(cache, &anchor_derivs)?;
        Ok(GradientSnapshot {
            w_tilde,
            h_grad,
            anchor_derivs,
        })
    }
}

/// Combines the three terms of a variance-reduced estimator in a fixed
/// component order: (now - correction) + anchor_full.
pub fn variance_reduced_combine(
    now: &Array1<f64>,
    correction: &Array1<f64>,
    full: &Array1<f64>,
) -> Array1<f64> {
    let mut out = Array1::<f64>::zeros(now.len());
    for r in 0..now.len() {
        out[r] = (now[r] - correction[r]) + full[r];
    }
    out
}

/// The semi-stochastic estimator: exact mini-batch gradient at w_k, minus the
/// anchored mini-batch at the snapshot, plus the anchored full gradient.
pub fn semi_stochastic_gradient(
    w_k: &Array1<f64>,
    snapshot: &GradientSnapshot,
    batch: &[usize],
    ds: &Dataset,
    loss: &Loss,
    asg: &AnchorSampleGraph,
) -> Result<Array1<f64>> {
    let now = minibatch_gradient(w_k, batch, ds, loss)?;
    let correction = approx_minibatch_gradient(batch, ds, asg, &snapshot.anchor_derivs, loss)?;
    Ok(variance_reduced_combine(&now, &correction, &snapshot.h_grad))
}

/// Weight-proportional sampling with replacement: p draws with probability
/// weight_i / W, each scaled by W / p. Unbiased for any positive weighting.
pub struct WeightedSampler {
    dist: WeightedIndex<f64>,
    coeff: f64,
    p: usize,
}

impl WeightedSampler {
    pub fn new(ds: &Dataset, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("mini-batch size must be positive".into()));
        }
        let dist = WeightedIndex::new(ds.weights())
            .map_err(|e| Error::InvalidArgument(format!("sampling weights: {e}")))?;
        Ok(WeightedSampler {
            dist,
            coeff: ds.weight_total() / p as f64,
            p,
        })
    }

    pub fn draw(
        &self,
        w: &Array1<f64>,
        ds: &Dataset,
        loss: &Loss,
        rng: &mut ChaCha8Rng,
    ) -> Result<Array1<f64>> {
        if w.len() != ds.dim() {
            return Err(Error::Dimension {
                expected: ds.dim(),
                got: w.len(),
            });
        }
        let mut picks: Vec<usize> = (0..self.p).map(|_| self.dist.sample(rng)).collect();
        picks.sort_unstable();
        let items: Vec<(usize, f64, f64)> = picks
            .into_iter()
            .map(|i| (i, self.coeff, exact_case_scalar(w, ds, loss, i)))
            .collect();
        Ok(accumulate_case_sum(ds, &items, loss))
    }
}

/// Stratified sampling: strata are fixed index groups (typically k-means
/// clusters); each draw picks one member per stratum uniformly and weights it
/// by the stratum population.
pub struct StratifiedSampler {
    strata: Vec<Vec<usize>>,
}

impl StratifiedSampler {
    /// Builds strata by clustering the feature rows. Empty clusters are
    /// dropped, so the effective stratum count can be below `clusters`.
    pub fn from_kmeans(
        ds: &Dataset,
        clusters: usize,
        max_iter: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let km = kmeans(ds.features(), clusters, max_iter, rng)?;
        let mut strata: Vec<Vec<usize>> = vec![Vec::new(); clusters];
        for (i, &c) in km.assignments.iter().enumerate() {
            strata[c].push(i);
        }
        strata.retain(|s| !s.is_empty());
        Ok(StratifiedSampler { strata })
    }

    pub fn strata(&self) -> &[Vec<usize>] {
        &self.strata
    }

    pub fn draw(
        &self,
        w: &Array1<f64>,
        ds: &Dataset,
        loss: &Loss,
        rng: &mut ChaCha8Rng,
    ) -> Result<Array1<f64>> {
        if w.len() != ds.dim() {
            return Err(Error::Dimension {
                expected: ds.dim(),
                got: w.len(),
            });
        }
        let mut items: Vec<(usize, f64, f64)> = self
            .strata
            .iter()
            .map(|members| {
                let i = members[rng.random_range(0..members.len())];
                let coeff = members.len() as f64 * ds.weight(i);
                (i, coeff, exact_case_scalar(w, ds, loss, i))
            })
            .collect();
        items.sort_unstable_by_key(|(i, _, _)| *i);
        Ok(accumulate_case_sum(ds, &items, loss))
    }
}

/// Control-variate estimator: subtracts a per-sample surrogate whose
/// derivative scalar is frozen at the weighted class-mean margin and adds the
/// surrogate's exact O(d) expectation back.
pub struct ControlVariate {
    s_pos: Array1<f64>,
    s_neg: Array1<f64>,
    mean_pos: Array1<f64>,
    mean_neg: Array1<f64>,
    p: usize,
}

impl ControlVariate {
    pub fn new(ds: &Dataset, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("mini-batch size must be positive".into()));
        }
        let s_pos = ds.weighted_label_sum(true);
        let s_neg = ds.weighted_label_sum(false);
        let w_pos: f64 = (0..ds.len())
            .filter(|&i| ds.label(i) > 0.0)
            .map(|i| ds.weight(i))
            .sum();
        let w_neg = ds.weight_total() - w_pos;
        if w_pos == 0.0 || w_neg == 0.0 {
            return Err(Error::InvalidArgument(
                "control variates need both classes present".into(),
            ));
        }
        Ok(ControlVariate {
            mean_pos: s_pos.map(|v| v / w_pos),
            mean_neg: s_neg.map(|v| v / w_neg),
            s_pos,
            s_neg,
            p,
        })
    }

    pub fn draw(
        &self,
        w: &Array1<f64>,
        ds: &Dataset,
        loss: &Loss,
        rng: &mut ChaCha8Rng,
    ) -> Result<Array1<f64>> {
        let batch = sample_minibatch(ds.len(), self.p, rng)?;
        let now = minibatch_gradient(w, &batch, ds, loss)?;
        let u_pos = w.dot(&self.mean_pos);
        let u_neg = w.dot(&self.mean_neg);
        let scale = ds.len() as f64 / batch.len() as f64;
        let items: Vec<(usize, f64, f64)> = batch
            .iter()
            .map(|&i| {
                let s = if ds.label(i) > 0.0 {
                    loss.case1_scalar(u_pos)
                } else {
                    loss.case2_scalar(u_neg)
                };
                (i, scale * ds.weight(i), s)
            })
            .collect();
        let surrogate_batch = accumulate_case_sum(ds, &items, loss);
        let psi_pos = loss.atomic_derivative(u_pos, 1.0);
        let psi_neg = loss.atomic_derivative(u_neg, -1.0);
        let mut surrogate_mean = Array1::<f64>::zeros(ds.dim());
        for r in 0..ds.dim() {
            surrogate_mean[r] = psi_pos * self.s_pos[r] + psi_neg * self.s_neg[r];
        }
        Ok(variance_reduced_combine(&now, &surrogate_batch, &surrogate_mean))
    }
}
