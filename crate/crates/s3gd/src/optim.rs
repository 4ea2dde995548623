//! The five optimizers (SGD, stratified SGD, Prox-SVRG, control-variate SGD
//! and the anchored semi-stochastic method), the convergence certificate and
//! a deterministic reference solver for the composite optimum.

use std::time::Instant;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::anchors::{
    build_asg, kmeans, precompute_propagation, select_anchors, AnchorSampleGraph, AnchorSet,
    PropagationCache, SigmaRule,
};
use crate::data::Dataset;
use crate::diagnostics::{pearson_correlation, Trace, TraceRecord};
use crate::error::{Error, Result};
use crate::gradients::{
    approx_minibatch_gradient, full_gradient, minibatch_gradient, sample_minibatch,
    variance_reduced_combine, ControlVariate, GradientSnapshot, StratifiedSampler, WeightedSampler,
};
use crate::loss::Loss;
use crate::prox::Regularizer;

/// Which optimizer a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sgd,
    Ssgd,
    Svrg,
    Scv,
    S3gd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Sgd,
        Algorithm::Ssgd,
        Algorithm::Svrg,
        Algorithm::Scv,
        Algorithm::S3gd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Ssgd => "ssgd",
            Algorithm::Svrg => "svrg",
            Algorithm::Scv => "scv",
            Algorithm::S3gd => "s3gd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Algorithm::Sgd),
            "ssgd" => Ok(Algorithm::Ssgd),
            "svrg" => Ok(Algorithm::Svrg),
            "scv" => Ok(Algorithm::Scv),
            "s3gd" => Ok(Algorithm::S3gd),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// How the next outer-loop reference point is chosen from the inner iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotRule {
    /// Use the last inner iterate (default; no extra objective evaluations).
    Last,
    /// Use the inner iterate with the lowest objective. Costs one full
    /// objective evaluation per inner step.
    Best,
}

impl SnapshotRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(SnapshotRule::Last),
            "best" => Ok(SnapshotRule::Best),
            other => Err(Error::Config(format!("unknown snapshot rule {other:?}"))),
        }
    }
}

/// Per-run parameters shared by all five optimizers.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub eta: f64,
    /// Mini-batch size; doubles as the stratum count for stratified SGD.
    pub p: usize,
    /// Inner-loop length of the nested methods.
    pub k_in: usize,
    /// Total inner-iteration budget.
    pub total_iters: usize,
    pub checkpoint_every: usize,
    pub seed: u64,
    pub snapshot_rule: SnapshotRule,
    /// Record the Pearson correlation between the step estimator and the
    /// exact gradient at every checkpoint (costs one full gradient each).
    pub record_correlation: bool,
    /// When positive, estimate the squared deviation of the step estimator
    /// from the exact gradient at every checkpoint using this many draws.
    pub variance_trials: usize,
    /// Abort when the objective exceeds this multiple of its initial value.
    pub divergence_factor: f64,
}

impl RunConfig {
    pub fn new(eta: f64, seed: u64) -> Self {
        RunConfig {
            eta,
            p: 10,
            k_in: 20,
            total_iters: 20_000,
            checkpoint_every: 50,
            seed,
            snapshot_rule: SnapshotRule::Last,
            record_correlation: false,
            variance_trials: 0,
            divergence_factor: 1e3,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.p == 0 || self.p > n {
            return Err(Error::Config(format!(
                "mini-batch size {} must be in 1..={n}",
                self.p
            )));
        }
        if self.k_in == 0 {
            return Err(Error::Config("k_in must be at least 1".into()));
        }
        if self.total_iters == 0 {
            return Err(Error::Config("total_iters must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::Config("checkpoint_every must be at least 1".into()));
        }
        if !(self.divergence_factor.is_finite() && self.divergence_factor > 1.0) {
            return Err(Error::Config(format!(
                "divergence_factor must exceed 1, got {}",
                self.divergence_factor
            )));
        }
        Ok(())
    }
}

/// Anchor pipeline parameters for the semi-stochastic method.
#[derive(Debug, Clone)]
pub struct AnchorConfig {
    /// Anchor count.
    pub m: usize,
    /// Nearest anchors interpolated per sample.
    pub k: usize,
    pub kmeans_max_iter: usize,
    pub seed: u64,
    pub sigma_rule: SigmaRule,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        AnchorConfig {
            m: 100,
            k: 3,
            kmeans_max_iter: 20,
            seed: 0,
            sigma_rule: SigmaRule::AsPrinted,
        }
    }
}

/// Final iterate and checkpoint history of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub w: Array1<f64>,
    pub trace: Trace,
}

/// Composite objective F(w) = P(w) + R(w), intercept unpenalized.
pub fn objective(w: &Array1<f64>, ds: &Dataset, loss: &Loss, reg: &Regularizer) -> Result<f64> {
    Ok(loss.smooth_objective(w, ds)? + reg.value(w, true))
}

/// Builds the full anchor pipeline (k-means, anchor snapping, affinity graph,
/// propagation cache) for a dataset.
pub fn build_anchor_pipeline(
    ds: &Dataset,
    cfg: &AnchorConfig,
) -> Result<(AnchorSet, AnchorSampleGraph, PropagationCache)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let km = kmeans(ds.features(), cfg.m, cfg.kmeans_max_iter, &mut rng)?;
    let anchors = select_anchors(ds, &km.centers)?;
    let asg = build_asg(ds, &anchors, cfg.k, cfg.sigma_rule)?;
    let cache = precompute_propagation(ds, &asg)?;
    Ok((anchors, asg, cache))
}

/// Shared checkpoint bookkeeping: objective evaluation, optional test
/// objective, wall clock and the divergence guard.
struct Recorder<'a> {
    trace: Trace,
    threshold: f64,
    every: u64,
    total: u64,
    ds: &'a Dataset,
    test: Option<&'a Dataset>,
    loss: &'a Loss,
    reg: &'a Regularizer,
    started: Instant,
}

impl<'a> Recorder<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        algorithm: &str,
        cfg: &RunConfig,
        w0: &Array1<f64>,
        ds: &'a Dataset,
        test: Option<&'a Dataset>,
        loss: &'a Loss,
        reg: &'a Regularizer,
    ) -> Result<Self> {
        if let Some(t) = test {
            if t.dim() != ds.dim() {
                return Err(Error::Dimension {
                    expected: ds.dim(),
                    got: t.dim(),
                });
            }
        }
        let f0 = objective(w0, ds, loss, reg)?;
        let mut rec = Recorder {
            trace: Trace::new(algorithm, cfg.eta, cfg.seed),
            threshold: cfg.divergence_factor * f0,
            every: cfg.checkpoint_every as u64,
            total: cfg.total_iters as u64,
            ds,
            test,
            loss,
            reg,
            started: Instant::now(),
        };
        rec.push(0, f0, w0, None, None)?;
        Ok(rec)
    }

    fn due(&self, iter: u64) -> bool {
        iter % self.every == 0 || iter == self.total
    }

    fn push(
        &mut self,
        iter: u64,
        train_obj: f64,
        w: &Array1<f64>,
        grad_corr: Option<f64>,
        est_var: Option<f64>,
    ) -> Result<bool> {
        let test_obj = match self.test {
            Some(t) => Some(objective(w, t, self.loss, self.reg)?),
            None => None,
        };
        self.trace.records.push(TraceRecord {
            iter,
            wall_s: self.started.elapsed().as_secs_f64(),
            train_obj,
            test_obj,
            grad_corr,
            est_var,
        });
        if !train_obj.is_finite() || train_obj > self.threshold {
            self.trace.diverged = true;
            return Ok(false);
        }
        Ok(true)
    }

    /// Records a due checkpoint; returns false when the run must stop.
    fn checkpoint(
        &mut self,
        iter: u64,
        w: &Array1<f64>,
        grad_corr: Option<f64>,
        est_var: Option<f64>,
    ) -> Result<bool> {
        let obj = objective(w, self.ds, self.loss, self.reg)?;
        self.push(iter, obj, w, grad_corr, est_var)
    }

    fn finish(mut self, preprocess_s: f64) -> Trace {
        self.trace.preprocess_s = preprocess_s;
        self.trace
    }
}

fn prox_step(
    w: &Array1<f64>,
    g: &Array1<f64>,
    eta: f64,
    reg: &Regularizer,
) -> Result<Array1<f64>> {
    let mut v = Array1::<f64>::zeros(w.len());
    for r in 0..w.len() {
        v[r] = w[r] - eta * g[r];
    }
    reg.prox(&v, eta, true)
}

/// Optional per-checkpoint diagnostics shared by all runners.
#[allow(clippy::too_many_arguments)]
fn checkpoint_diagnostics(
    cfg: &RunConfig,
    iter: u64,
    w_before: &Array1<f64>,
    g: &Array1<f64>,
    ds: &Dataset,
    loss: &Loss,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Result<Array1<f64>>,
) -> Result<(Option<f64>, Option<f64>)> {
    if !cfg.record_correlation && cfg.variance_trials == 0 {
        return Ok((None, None));
    }
    let exact = full_gradient(w_before, ds, loss)?;
    let corr = if cfg.record_correlation {
        Some(pearson_correlation(g, &exact)?.value)
    } else {
        None
    };
    let est_var = if cfg.variance_trials > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(iter);
        let mut failure = None;
        let v = crate::diagnostics::estimator_variance(
            |r| match draw(r) {
                Ok(g) => g,
                Err(e) => {
                    failure = Some(e);
                    Array1::zeros(exact.len())
                }
            },
            &exact,
            cfg.variance_trials.max(2),
            &mut rng,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Some(v.mean)
    } else {
        None
    };
    Ok((corr, est_var))
}

/// Single-loop driver shared by the three plain stochastic methods.
fn run_single<E>(
    algorithm: Algorithm,
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
    preprocess_s: f64,
    estimator: E,
) -> Result<RunOutput>
where
    E: Fn(&Array1<f64>, &mut ChaCha8Rng) -> Result<Array1<f64>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w0 = Array1::<f64>::zeros(ds.dim());
    let mut rec = Recorder::new(algorithm.name(), cfg, &w0, ds, test, loss, reg)?;
    let mut w = w0;
    for iter in 1..=cfg.total_iters as u64 {
        let g = estimator(&w, &mut rng)?;
        let mut row = (None, None);
        if rec.due(iter) {
            row = checkpoint_diagnostics(cfg, iter, &w, &g, ds, loss, |r| estimator(&w, r))?;
        }
        w = prox_step(&w, &g, cfg.eta, reg)?;
        if rec.due(iter) && !rec.checkpoint(iter, &w, row.0, row.1)? {
            break;
        }
    }
    Ok(RunOutput {
        w,
        trace: rec.finish(preprocess_s),
    })
}

/// Mini-batch proximal SGD with weight-proportional sampling (with
/// replacement) and the matching unbiased scaling.
pub fn run_sgd(
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    cfg.validate(ds.len())?;
    let sampler = WeightedSampler::new(ds, cfg.p)?;
    run_single(Algorithm::Sgd, cfg, ds, loss, reg, test, 0.0, |w, rng| {
        sampler.draw(w, ds, loss, rng)
    })
}

/// Stratified SGD: k-means strata (p clusters) fixed up front, one uniform
/// draw per stratum per iteration, each weighted by its population share.
pub fn run_ssgd(
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    cfg.validate(ds.len())?;
    let setup_started = Instant::now();
    let mut setup_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    setup_rng.set_stream(1);
    let sampler = StratifiedSampler::from_kmeans(ds, cfg.p, 20, &mut setup_rng)?;
    let preprocess_s = setup_started.elapsed().as_secs_f64();
    run_single(
        Algorithm::Ssgd,
        cfg,
        ds,
        loss,
        reg,
        test,
        preprocess_s,
        |w, rng| sampler.draw(w, ds, loss, rng),
    )
}

/// Control-variate SGD: the per-sample surrogate evaluates the derivative
/// scalar at the weighted class mean, whose expectation is available in O(d)
/// from precomputed class sums.
pub fn run_scv(
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    cfg.validate(ds.len())?;
    let cv = ControlVariate::new(ds, cfg.p)?;
    run_single(Algorithm::Scv, cfg, ds, loss, reg, test, 0.0, |w, rng| {
        cv.draw(w, ds, loss, rng)
    })
}

/// Snapshot pathway of the nested loop: exact full gradients (Prox-SVRG) or
/// the anchored approximation.
enum SnapshotPath<'a> {
    Exact,
    Anchored {
        anchors: &'a AnchorSet,
        asg: &'a AnchorSampleGraph,
        cache: &'a PropagationCache,
    },
}

#[allow(clippy::too_many_arguments)]
fn run_nested(
    algorithm: Algorithm,
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    path: SnapshotPath<'_>,
    test: Option<&Dataset>,
    preprocess_s: f64,
) -> Result<RunOutput> {
    cfg.validate(ds.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w0 = Array1::<f64>::zeros(ds.dim());
    let mut rec = Recorder::new(algorithm.name(), cfg, &w0, ds, test, loss, reg)?;
    let mut w_tilde = w0;
    let mut w = w_tilde.clone();
    let mut iter: u64 = 0;
    let total = cfg.total_iters as u64;

    'outer: while iter < total {
        // Snapshot at the current reference point.
        let (full_corr, snap): (Array1<f64>, Option<GradientSnapshot>) = match &path {
            SnapshotPath::Exact => (full_gradient(&w_tilde, ds, loss)?, None),
            SnapshotPath::Anchored { anchors, cache, .. } => {
                let s = GradientSnapshot::new(w_tilde.clone(), anchors, cache, loss)?;
                (s.h_grad.clone(), Some(s))
            }
        };
        w = w_tilde.clone();
        let mut best: Option<(f64, Array1<f64>)> = None;

        for _ in 0..cfg.k_in {
            let batch = sample_minibatch(ds.len(), cfg.p, &mut rng)?;
            let now = minibatch_gradient(&w, &batch, ds, loss)?;
            let correction = match &path {
                SnapshotPath::Exact => minibatch_gradient(&w_tilde, &batch, ds, loss)?,
                SnapshotPath::Anchored { asg, .. } => approx_minibatch_gradient(
                    &batch,
                    ds,
                    asg,
                    &snap.as_ref().expect("anchored path has a snapshot").anchor_derivs,
                    loss,
                )?,
            };
            let g = variance_reduced_combine(&now, &correction, &full_corr);
            let mut row = (None, None);
            if rec.due(iter + 1) {
                row = checkpoint_diagnostics(cfg, iter + 1, &w, &g, ds, loss, |r| {
                    let batch = sample_minibatch(ds.len(), cfg.p, r)?;
                    let now = minibatch_gradient(&w, &batch, ds, loss)?;
                    let correction = match &path {
                        SnapshotPath::Exact => minibatch_gradient(&w_tilde, &batch, ds, loss)?,
                        SnapshotPath::Anchored { asg, .. } => approx_minibatch_gradient(
                            &batch,
                            ds,
                            asg,
                            &snap.as_ref().expect("anchored path has a snapshot").anchor_derivs,
                            loss,
                        )?,
                    };
                    Ok(variance_reduced_combine(&now, &correction, &full_corr))
                })?;
            }
            w = prox_step(&w, &g, cfg.eta, reg)?;
            iter += 1;
            if cfg.snapshot_rule == SnapshotRule::Best {
                let f = objective(&w, ds, loss, reg)?;
                if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
                    best = Some((f, w.clone()));
                }
            }
            if rec.due(iter) && !rec.checkpoint(iter, &w, row.0, row.1)? {
                break 'outer;
            }
            if iter >= total {
                break;
            }
        }

        w_tilde = match cfg.snapshot_rule {
            SnapshotRule::Last => w.clone(),
            SnapshotRule::Best => best.map(|(_, bw)| bw).unwrap_or_else(|| w.clone()),
        };
    }

    Ok(RunOutput {
        w,
        trace: rec.finish(preprocess_s),
    })
}

/// Proximal SVRG: exact full gradient at each snapshot, variance-reduced
/// inner steps.
pub fn run_svrg(
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    run_nested(
        Algorithm::Svrg,
        cfg,
        ds,
        loss,
        reg,
        SnapshotPath::Exact,
        test,
        0.0,
    )
}

/// The anchored semi-stochastic method with a caller-supplied anchor
/// pipeline. No preprocessing time is attributed to the run.
#[allow(clippy::too_many_arguments)]
pub fn run_s3gd_prepared(
    cfg: &RunConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    anchors: &AnchorSet,
    asg: &AnchorSampleGraph,
    cache: &PropagationCache,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    run_nested(
        Algorithm::S3gd,
        cfg,
        ds,
        loss,
        reg,
        SnapshotPath::Anchored { anchors, asg, cache },
        test,
        0.0,
    )
}

/// The anchored semi-stochastic method: builds the anchor pipeline (timed as
/// preprocessing), then runs the nested loop with anchored snapshots.
pub fn run_s3gd(
    cfg: &RunConfig,
    anchor_cfg: &AnchorConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    let started = Instant::now();
    let (anchors, asg, cache) = build_anchor_pipeline(ds, anchor_cfg)?;
    let preprocess_s = started.elapsed().as_secs_f64();
    run_nested(
        Algorithm::S3gd,
        cfg,
        ds,
        loss,
        reg,
        SnapshotPath::Anchored {
            anchors: &anchors,
            asg: &asg,
            cache: &cache,
        },
        test,
        preprocess_s,
    )
}

/// Dispatches to the runner for `algorithm`.
#[allow(clippy::too_many_arguments)]
pub fn run(
    algorithm: Algorithm,
    cfg: &RunConfig,
    anchor_cfg: &AnchorConfig,
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    test: Option<&Dataset>,
) -> Result<RunOutput> {
    match algorithm {
        Algorithm::Sgd => run_sgd(cfg, ds, loss, reg, test),
        Algorithm::Ssgd => run_ssgd(cfg, ds, loss, reg, test),
        Algorithm::Svrg => run_svrg(cfg, ds, loss, reg, test),
        Algorithm::Scv => run_scv(cfg, ds, loss, reg, test),
        Algorithm::S3gd => run_s3gd(cfg, anchor_cfg, ds, loss, reg, test),
    }
}

/// Linear-rate certificate for the nested methods on a strongly convex
/// composite objective.
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    /// Per-outer-loop contraction factor.
    pub rho: f64,
    /// Multiplier mapping the squared approximation error to the
    /// convergence plateau.
    pub delta_coeff: f64,
    /// Upper step-size limit 1/(8 L).
    pub eta_max: f64,
    /// Set when eta lies in (0, eta_max) and rho < 1.
    pub feasible: bool,
}

/// Evaluates the certificate for step size `eta`, Lipschitz constant
/// `l_max`, total strong convexity `mu_total` and inner-loop length `m`.
pub fn certificate(eta: f64, l_max: f64, mu_total: f64, m: usize) -> Result<Certificate> {
    if !(l_max.is_finite() && l_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant must be positive, got {l_max}"
        )));
    }
    if !(mu_total.is_finite() && mu_total > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "certificate needs strong convexity, got mu = {mu_total}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("inner length m must be positive".into()));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let mf = m as f64;
    let eta_max = 1.0 / (8.0 * l_max);
    let one_minus = 1.0 - 4.0 * l_max * eta;
    let rho = if one_minus > 0.0 {
        1.0 / (mu_total * eta * one_minus * mf) + 4.0 * l_max * eta * (mf + 1.0) / (one_minus * mf)
    } else {
        f64::INFINITY
    };
    let den = eta * mu_total * (mf - 4.0 * eta * l_max * (2.0 * mf + 1.0)) - 1.0;
    let delta_coeff = 8.0 * eta * eta * l_max * mu_total * mf / den;
    let feasible = eta < eta_max && rho < 1.0;
    Ok(Certificate {
        rho,
        delta_coeff,
        eta_max,
        feasible,
    })
}

/// Deterministic high-precision solver for the composite optimum via
/// accelerated proximal gradient with function-value restarts. Stops when the
/// proximal-gradient map norm falls below `tol`.
pub fn reference_minimum(
    ds: &Dataset,
    loss: &Loss,
    reg: &Regularizer,
    tol: f64,
    max_iter: usize,
) -> Result<(Array1<f64>, f64)> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let l_weighted: f64 = (0..ds.len())
        .map(|i| {
            let sq = ds.sample(i).iter().map(|v| v * v).sum::<f64>();
            ds.weight(i) * loss.lipschitz(sq)
        })
        .sum();
    let eta = 1.0 / l_weighted;
    let d = ds.dim();
    let mut w = Array1::<f64>::zeros(d);
    let mut w_prev = w.clone();
    let mut f_curr = objective(&w, ds, loss, reg)?;
    let mut t: f64 = 1.0;
    let mut t_prev: f64 = 1.0;
    for _ in 0..max_iter {
        let momentum = (t_prev - 1.0) / t;
        let mut y = Array1::<f64>::zeros(d);
        for r in 0..d {
            y[r] = w[r] + momentum * (w[r] - w_prev[r]);
        }
        let g = full_gradient(&y, ds, loss)?;
        let mut candidate = prox_step(&y, &g, eta, reg)?;
        let map_norm = {
            let mut acc = 0.0;
            for r in 0..d {
                let gm = (y[r] - candidate[r]) / eta;
                acc += gm * gm;
            }
            acc.sqrt()
        };
        let mut f_next = objective(&candidate, ds, loss, reg)?;
        if f_next > f_curr {
            // Momentum overshoot: restart from the current iterate.
            let g = full_gradient(&w, ds, loss)?;
            candidate = prox_step(&w, &g, eta, reg)?;
            f_next = objective(&candidate, ds, loss, reg)?;
            t = 1.0;
        }
        w_prev = w;
        w = candidate;
        f_curr = f_next;
        t_prev = t;
        t = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if map_norm <= tol {
            return Ok((w, f_curr));
        }
    }
    Err(Error::NoConvergence(format!(
        "reference solver: gradient map above {tol} after {max_iter} iterations"
    )))
}
