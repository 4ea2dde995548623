//! Race all five optimizers on one problem and report objective gaps against
//! a high-precision reference optimum, plus wall time per 50 iterations.

use s3gd::{
    reference_minimum, run, Algorithm, AnchorConfig, Loss, Regularizer, Result, RunConfig,
    SynthSpec,
};

fn main() -> Result<()> {
    let ds = s3gd::synth_gaussian(SynthSpec {
        n: 3000,
        d: 20,
        clusters: 10,
        separation: 4.0,
        seed: 11,
    })?
    .unit_normalized();
    let loss = Loss::Logistic;
    let reg = Regularizer::tikhonov(1e-3)?;

    let (_, f_star) = reference_minimum(&ds, &loss, &reg, 1e-10, 500_000)?;
    println!("reference optimum F* = {f_star:.12}");

    let mut cfg = RunConfig::new(0.5, 7);
    cfg.total_iters = 8000;
    cfg.checkpoint_every = 200;
    let anchors = AnchorConfig {
        m: 100,
        ..AnchorConfig::default()
    };

    println!("{:<6} {:>14} {:>14} {:>12} {:>10}", "algo", "final gap", "tail gap", "wall/50 it", "prep (s)");
    for algorithm in Algorithm::ALL {
        let mut run_cfg = cfg.clone();
        if algorithm == Algorithm::Svrg {
            run_cfg.k_in = 50;
        }
        let out = run(algorithm, &run_cfg, &anchors, &ds, &loss, &reg, None)?;
        let final_gap = out.trace.records.last().expect("has records").train_obj - f_star;
        let tail_gap = out.trace.tail_objective() - f_star;
        println!(
            "{:<6} {:>14.6e} {:>14.6e} {:>10.4}ms {:>10.4}",
            algorithm.name(),
            final_gap,
            tail_gap,
            out.trace.wall_per_50() * 1e3,
            out.trace.preprocess_s
        );
    }
    Ok(())
}
