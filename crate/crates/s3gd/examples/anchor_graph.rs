//! Walk through the anchor pipeline step by step: k-means clustering, anchor
//! selection (nearest real samples to the centers), and the anchor-sample
//! affinity graph with its Gaussian interpolation weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use s3gd::{
    build_asg, kmeans, select_anchors, synth_gaussian, Result, SigmaRule, SynthSpec,
};

fn main() -> Result<()> {
    let ds = synth_gaussian(SynthSpec {
        n: 400,
        d: 6,
        clusters: 5,
        separation: 5.0,
        seed: 7,
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let km = kmeans(ds.features(), 8, 50, &mut rng)?;
    println!("k-means WCSS per sweep: {:?}", km.wcss_history);
    assert!(km.wcss_history.windows(2).all(|w| w[1] <= w[0] + 1e-9));

    let anchors = select_anchors(&ds, &km.centers)?;
    println!(
        "selected {} anchors, backed by samples {:?}",
        anchors.m(),
        anchors.source_indices()
    );

    for rule in [SigmaRule::AsPrinted, SigmaRule::Unrooted] {
        let asg = build_asg(&ds, &anchors, 3, rule)?;
        let gammas = asg.gammas(0);
        println!(
            "{rule:?}: sample 0 interpolates anchors {:?} with weights {:?} (sum {:.12})",
            asg.neighbors(0),
            gammas,
            gammas.iter().sum::<f64>()
        );
        println!(
            "  graph stores {} weighted edges ({} samples x {} neighbors)",
            asg.nnz(),
            ds.len(),
            3
        );
    }
    Ok(())
}
