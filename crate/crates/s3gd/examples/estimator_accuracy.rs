//! Compare the gradient estimators on one dataset: empirical bias (all should
//! be unbiased), mean squared deviation from the exact gradient, and how the
//! anchored snapshot error shrinks as the anchor budget grows.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s3gd::{
    build_anchor_pipeline, estimator_variance, full_gradient, minibatch_gradient,
    sample_minibatch, semi_stochastic_gradient, synth_gaussian, AnchorConfig, ControlVariate,
    GradientSnapshot, Loss, Result, StratifiedSampler, SynthSpec, WeightedSampler,
};

fn main() -> Result<()> {
    let ds = synth_gaussian(SynthSpec {
        n: 1500,
        d: 12,
        clusters: 8,
        separation: 5.0,
        seed: 3,
    })?;
    let loss = Loss::Logistic;
    let p = 10;
    let trials = 3000;

    // A mildly informative iterate, away from both 0 and the optimum.
    let mut wrng = ChaCha8Rng::seed_from_u64(99);
    let w = Array1::from_iter((0..ds.dim()).map(|_| wrng.random_range(-0.3..0.3)));
    let exact = full_gradient(&w, &ds, &loss)?;

    let weighted = WeightedSampler::new(&ds, p)?;
    let mut setup_rng = ChaCha8Rng::seed_from_u64(4);
    let strata = StratifiedSampler::from_kmeans(&ds, p, 30, &mut setup_rng)?;
    let cv = ControlVariate::new(&ds, p)?;
    let (anchors, asg, cache) = build_anchor_pipeline(
        &ds,
        &AnchorConfig {
            m: 100,
            ..AnchorConfig::default()
        },
    )?;
    let snapshot = GradientSnapshot::new(w.clone(), &anchors, &cache, &loss)?;

    println!("estimator deviation from the exact gradient (p = {p}, {trials} draws):");
    let report = |name: &str, f: &mut dyn FnMut(&mut ChaCha8Rng) -> Array1<f64>| {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let v = estimator_variance(f, &exact, trials, &mut rng).expect("valid trials");
        println!("  {name:<16} E||g_hat - g||^2 = {:>12.6e} (se {:.1e})", v.mean, v.std_error);
    };
    report("minibatch", &mut |rng| {
        let batch = sample_minibatch(ds.len(), p, rng).unwrap();
        minibatch_gradient(&w, &batch, &ds, &loss).unwrap()
    });
    report("weighted", &mut |rng| weighted.draw(&w, &ds, &loss, rng).unwrap());
    report("stratified", &mut |rng| strata.draw(&w, &ds, &loss, rng).unwrap());
    report("control-variate", &mut |rng| cv.draw(&w, &ds, &loss, rng).unwrap());
    report("semi-stochastic", &mut |rng| {
        let batch = sample_minibatch(ds.len(), p, rng).unwrap();
        semi_stochastic_gradient(&w, &snapshot, &batch, &ds, &loss, &asg).unwrap()
    });

    println!("\nanchored snapshot gradient error by anchor budget:");
    for m in [10, 40, 100, 400] {
        let (anchors, _, cache) = build_anchor_pipeline(
            &ds,
            &AnchorConfig {
                m,
                ..AnchorConfig::default()
            },
        )?;
        let snap = GradientSnapshot::new(w.clone(), &anchors, &cache, &loss)?;
        let err: f64 = snap
            .h_grad
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        println!("  m = {m:>4}: ||approx - exact|| = {err:.6e}");
    }
    Ok(())
}
