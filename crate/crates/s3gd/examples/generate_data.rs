//! Generate a clustered synthetic dataset, write it in LIBSVM format, read it
//! back and verify the round trip.

use s3gd::{load_libsvm, synth_gaussian, write_libsvm, Result, SynthSpec};

fn main() -> Result<()> {
    let spec = SynthSpec {
        n: 500,
        d: 8,
        clusters: 6,
        separation: 4.0,
        seed: 42,
    };
    let ds = synth_gaussian(spec)?;
    let positives = ds.labels().iter().filter(|y| **y > 0.0).count();
    println!(
        "sampled {} points in {} dims ({} clusters, separation {}): {} positive / {} negative",
        ds.len(),
        ds.dim() - 1,
        spec.clusters,
        spec.separation,
        positives,
        ds.len() - positives
    );

    let path = std::env::temp_dir().join("s3gd_example_data.svm");
    write_libsvm(&ds, &path)?;
    println!("wrote {}", path.display());

    let back = load_libsvm(&path)?;
    assert_eq!(back.len(), ds.len());
    assert_eq!(back.dim(), ds.dim());
    let mut max_err = 0.0f64;
    for i in 0..ds.len() {
        for r in 0..ds.dim() {
            max_err = max_err.max((back.sample(i)[r] - ds.sample(i)[r]).abs());
        }
    }
    println!("round trip max coordinate error: {max_err:e}");

    // Reweight classes to equal total mass, useful for imbalanced data.
    let weighted = ds.with_class_weights()?;
    let pos_mass: f64 = (0..weighted.len())
        .filter(|&i| weighted.label(i) > 0.0)
        .map(|i| weighted.weight(i))
        .sum();
    println!(
        "after class weighting: positive mass {pos_mass:.3}, total {:.3}",
        weighted.weight_total()
    );
    Ok(())
}
