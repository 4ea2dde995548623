//! Semi-stochastic proximal gradient methods for composite objectives
//! F(w) = P(w) + R(w), where P is a weighted sum of margin losses over a
//! dataset and R is a simple regularizer with a closed-form prox.
//!
//! The centerpiece is an anchored variance-reduction scheme: snapshot
//! gradients are approximated by interpolating per-sample derivative scalars
//! from a small set of anchor samples, cutting each snapshot from O(n d) loss
//! evaluations to O(m d) plus one cached matrix pass. The crate also ships
//! four baselines (mini-batch SGD, stratified SGD, proximal SVRG and a
//! control-variate SGD), estimator diagnostics (bias, variance, gradient
//! correlation), a linear-rate certificate and an experiment harness with a
//! small CLI.
//!
//! Start with the `examples/` directory: each example exercises one layer of
//! the crate, from data generation through anchor construction, estimator
//! diagnostics, optimizer races and certificate sweeps.

pub mod anchors;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod gradients;
pub mod harness;
pub mod loss;
pub mod optim;
pub mod prox;

pub use anchors::{
    build_asg, kmeans, precompute_propagation, select_anchors, AnchorSampleGraph, AnchorSet,
    KmeansResult, PropagationCache, SigmaRule, SIGMA_EPSILON,
};
pub use data::{class_weights, load_libsvm, synth_gaussian, write_libsvm, Dataset, SynthSpec};
pub use diagnostics::{
    estimator_mean, estimator_variance, pearson_correlation, select_stable_stepsize, Correlation,
    StepsizeSelection, Trace, TraceRecord, VarianceEstimate, TRACE_HEADER,
};
pub use error::{Error, Result};
pub use gradients::{
    anchor_derivatives, approx_full_gradient, approx_minibatch_gradient, approx_sample_gradient,
    full_gradient, minibatch_gradient, sample_minibatch, semi_stochastic_gradient,
    variance_reduced_combine, AnchorDerivatives, ControlVariate, GradientSnapshot,
    StratifiedSampler, WeightedSampler,
};
pub use harness::{
    gen_data, run_experiment, summarize, DataSource, ExperimentConfig, SUMMARY_HEADER, WORKERS_ENV,
};
pub use loss::{Loss, SmoothnessReport};
pub use prox::{soft_threshold, Regularizer};
pub use optim::{
    build_anchor_pipeline, certificate, objective, reference_minimum, run, run_s3gd,
    run_s3gd_prepared, run_scv, run_sgd, run_ssgd, run_svrg, Algorithm, AnchorConfig, Certificate,
    RunConfig, RunOutput, SnapshotRule,
};
