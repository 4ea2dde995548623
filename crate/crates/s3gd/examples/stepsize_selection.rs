//! Step-size stability selection: run one algorithm across a step-size grid,
//! reject candidates that diverge, and pick the largest step size whose tail
//! objective stays within (1 + epsilon) of the reference optimum.

use s3gd::{
    reference_minimum, run_s3gd, select_stable_stepsize, AnchorConfig, Loss, Regularizer, Result,
    RunConfig, SynthSpec,
};

fn main() -> Result<()> {
    // Squared hinge has curvature that grows with ||x||, so oversized steps
    // genuinely blow up instead of bouncing around a bounded region.
    let ds = s3gd::synth_gaussian(SynthSpec {
        n: 800,
        d: 10,
        clusters: 5,
        separation: 4.0,
        seed: 21,
    })?
    .unit_normalized();
    let loss = Loss::SquaredHinge;
    let reg = Regularizer::tikhonov(1e-3)?;
    let (_, f_star) = reference_minimum(&ds, &loss, &reg, 1e-10, 500_000)?;
    println!("reference optimum F* = {f_star:.10}");

    let anchors = AnchorConfig {
        m: 80,
        ..AnchorConfig::default()
    };
    let mut traces = Vec::new();
    for eta in [0.1, 1.0, 5.0, 10.0] {
        let mut cfg = RunConfig::new(eta, 3);
        cfg.total_iters = 12_000;
        cfg.checkpoint_every = 100;
        let out = run_s3gd(&cfg, &anchors, &ds, &loss, &reg, None)?;
        println!(
            "eta = {eta:>5}: diverged = {:<5} tail objective = {:.8}",
            out.trace.diverged,
            out.trace.tail_objective()
        );
        traces.push(out.trace);
    }

    let refs: Vec<&_> = traces.iter().collect();
    let pick = select_stable_stepsize(&refs, f_star, 0.01)?;
    println!(
        "selected eta = {} (fallback = {}), threshold was {:.8}",
        pick.eta,
        pick.fallback,
        1.01 * f_star
    );
    Ok(())
}
