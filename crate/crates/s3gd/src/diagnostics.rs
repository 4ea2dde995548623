//! Run traces, estimator-quality diagnostics and the step-size selection
//! protocol.

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::Array1;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One checkpoint row of a run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: u64,
    pub wall_s: f64,
    pub train_obj: f64,
    pub test_obj: Option<f64>,
    pub grad_corr: Option<f64>,
    pub est_var: Option<f64>,
}

/// Checkpointed history of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: String,
    pub eta: f64,
    pub seed: u64,
    /// Set when the divergence guard aborted the run.
    pub diverged: bool,
    /// Setup time (clustering, anchor construction) excluded from the
    /// per-iteration wall clock.
    pub preprocess_s: f64,
    pub records: Vec<TraceRecord>,
}

/// Exact column set of the trace CSV files.
pub const TRACE_HEADER: &str = "iter,wall_s,train_obj,test_obj,grad_corr,est_var";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str, loc: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::parse(loc, format!("bad float {s:?}")))
}

impl Trace {
    pub fn new(algorithm: impl Into<String>, eta: f64, seed: u64) -> Self {
        Trace {
            algorithm: algorithm.into(),
            eta,
            seed,
            diverged: false,
            preprocess_s: 0.0,
            records: Vec::new(),
        }
    }

    /// Iterations covered by the trace (largest checkpoint index).
    pub fn total_iters(&self) -> u64 {
        self.records.last().map(|r| r.iter).unwrap_or(0)
    }

    /// Mean train objective over checkpoints in the final
    /// min(5000, total/4) iterations (at least the last checkpoint).
    pub fn tail_objective(&self) -> f64 {
        let total = self.total_iters();
        let window = 5000.min(total / 4).max(1);
        let lo = total.saturating_sub(window);
        let tail: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.iter > lo)
            .map(|r| r.train_obj)
            .collect();
        if tail.is_empty() {
            return self.records.last().map(|r| r.train_obj).unwrap_or(f64::NAN);
        }
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    /// Mean of the recorded gradient correlations, if any were recorded.
    pub fn mean_grad_corr(&self) -> Option<f64> {
        let vals: Vec<f64> = self.records.iter().filter_map(|r| r.grad_corr).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// Wall time per 50 iterations, measured from the last checkpoint.
    pub fn wall_per_50(&self) -> f64 {
        match self.records.last() {
            Some(r) if r.iter > 0 => r.wall_s / r.iter as f64 * 50.0,
            _ => 0.0,
        }
    }

    /// Writes the checkpoint table in the fixed schema
    /// `iter,wall_s,train_obj,test_obj,grad_corr,est_var` with empty cells
    /// for absent optional fields.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iter,
                r.wall_s,
                r.train_obj,
                fmt_opt(r.test_obj),
                fmt_opt(r.grad_corr),
                fmt_opt(r.est_var)
            )?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads back a checkpoint table written by [`Trace::write_csv`].
    /// Run metadata (algorithm, eta, seed, flags) is not part of the schema
    /// and is left at the values passed in.
    pub fn read_csv(
        reader: impl BufRead,
        origin: &str,
        algorithm: impl Into<String>,
        eta: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, "empty trace file"))??;
        if header.trim() != TRACE_HEADER {
            return Err(Error::parse(
                origin,
                format!("expected header {TRACE_HEADER:?}, got {header:?}"),
            ));
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let loc = format!("{origin}:{}", lineno + 2);
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::parse(&loc, format!("expected 6 fields, got {}", fields.len())));
            }
            records.push(TraceRecord {
                iter: fields[0]
                    .parse()
                    .map_err(|_| Error::parse(&loc, format!("bad iter {:?}", fields[0])))?,
                wall_s: fields[1]
                    .parse()
                    .map_err(|_| Error::parse(&loc, format!("bad wall_s {:?}", fields[1])))?,
                train_obj: fields[2]
                    .parse()
                    .map_err(|_| Error::parse(&loc, format!("bad train_obj {:?}", fields[2])))?,
                test_obj: parse_opt(fields[3], &loc)?,
                grad_corr: parse_opt(fields[4], &loc)?,
                est_var: parse_opt(fields[5], &loc)?,
            });
        }
        let mut trace = Trace::new(algorithm, eta, seed);
        trace.records = records;
        Ok(trace)
    }

    pub fn read_csv_path(
        path: impl AsRef<Path>,
        algorithm: impl Into<String>,
        eta: f64,
        seed: u64,
    ) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_csv(
            std::io::BufReader::new(file),
            &path.display().to_string(),
            algorithm,
            eta,
            seed,
        )
    }
}

/// Pearson correlation over coordinate pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    /// Set when either input is coordinate-wise constant; `value` is then 0.
    pub degenerate: bool,
}

/// Pearson correlation between two equal-length vectors, treating
/// coordinates as paired observations.
pub fn pearson_correlation(a: &Array1<f64>, b: &Array1<f64>) -> Result<Correlation> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty vectors".into()));
    }
    let constant = |v: &Array1<f64>| v.iter().all(|x| *x == v[0]);
    if constant(a) || constant(b) {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        value: cov / (va * vb).sqrt(),
        degenerate: false,
    })
}

/// Monte-Carlo estimate of E||g_hat - g_exact||^2 with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct VarianceEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Draws `trials` estimates from the closure and measures the mean squared
/// deviation from the exact gradient plus its standard error.
pub fn estimator_variance(
    mut estimator: impl FnMut(&mut ChaCha8Rng) -> Array1<f64>,
    exact: &Array1<f64>,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<VarianceEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument(
            "variance estimation needs at least 2 trials".into(),
        ));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let g = estimator(rng);
        if g.len() != exact.len() {
            return Err(Error::Dimension {
                expected: exact.len(),
                got: g.len(),
            });
        }
        let dev: f64 = g
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        sum += dev;
        sum_sq += dev * dev;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = (sum_sq / t - mean * mean).max(0.0) * t / (t - 1.0);
    Ok(VarianceEstimate {
        mean,
        std_error: (var / t).sqrt(),
        trials,
    })
}

/// Component-wise Monte-Carlo mean and standard error of an estimator.
pub fn estimator_mean(
    mut estimator: impl FnMut(&mut ChaCha8Rng) -> Array1<f64>,
    dim: usize,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Array1<f64>, Array1<f64>)> {
    if trials < 2 {
        return Err(Error::InvalidArgument(
            "mean estimation needs at least 2 trials".into(),
        ));
    }
    let mut sum = Array1::<f64>::zeros(dim);
    let mut sum_sq = Array1::<f64>::zeros(dim);
    for _ in 0..trials {
        let g = estimator(rng);
        if g.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: g.len(),
            });
        }
        for r in 0..dim {
            sum[r] += g[r];
            sum_sq[r] += g[r] * g[r];
        }
    }
    let t = trials as f64;
    let mean = sum.map(|s| s / t);
    let se = Array1::from_iter((0..dim).map(|r| {
        let var = (sum_sq[r] / t - mean[r] * mean[r]).max(0.0) * t / (t - 1.0);
        (var / t).sqrt()
    }));
    Ok((mean, se))
}

/// Outcome of the step-size selection protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeSelection {
    pub eta: f64,
    /// Set when no candidate passed and the smallest step size was returned
    /// as a conservative fallback.
    pub fallback: bool,
}

/// Selects the largest step size whose runs all stayed finite and whose mean
/// tail objective is within (1 + epsilon) of the reference optimum. Divergent
/// candidates are rejected outright; if nothing passes, the smallest
/// candidate is returned with the fallback flag set.
pub fn select_stable_stepsize(
    traces: &[&Trace],
    f_star: f64,
    epsilon: f64,
) -> Result<StepsizeSelection> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no traces supplied".into()));
    }
    if !f_star.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "reference objective must be finite, got {f_star}"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut etas: Vec<f64> = traces.iter().map(|t| t.eta).collect();
    etas.sort_by(|a, b| b.partial_cmp(a).expect("finite etas"));
    etas.dedup();
    let threshold = (1.0 + epsilon) * f_star;
    for &eta in &etas {
        let group: Vec<&&Trace> = traces.iter().filter(|t| t.eta == eta).collect();
        if group.iter().any(|t| t.diverged) {
            continue;
        }
        let tails: Vec<f64> = group.iter().map(|t| t.tail_objective()).collect();
        let mean_tail = tails.iter().sum::<f64>() / tails.len() as f64;
        if mean_tail.is_finite() && mean_tail <= threshold {
            return Ok(StepsizeSelection { eta, fallback: false });
        }
    }
    Ok(StepsizeSelection {
        eta: *etas.last().expect("non-empty candidate list"),
        fallback: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn pearson_pinned_value() {
        let a = arr1(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = arr1(&[2.0, 4.0, 5.0, 4.0, 5.0]);
        let c = pearson_correlation(&a, &b).unwrap();
        assert!(!c.degenerate);
        assert!((c.value - 0.7745966692414834).abs() <= 1e-12);
    }

    #[test]
    fn pearson_degenerate_and_errors() {
        let a = arr1(&[3.0, 3.0, 3.0]);
        let b = arr1(&[1.0, 2.0, 3.0]);
        let c = pearson_correlation(&a, &b).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.degenerate);
        assert!(pearson_correlation(&a, &arr1(&[1.0])).is_err());
    }

    proptest! {
        #[test]
        fn pearson_affine_invariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 6),
            ys in proptest::collection::vec(-10.0f64..10.0, 6),
            scale in 0.1f64..5.0,
            shift in -10.0f64..10.0,
        ) {
            let a = arr1(&xs);
            let b = arr1(&ys);
            let base = pearson_correlation(&a, &b).unwrap();
            prop_assume!(!base.degenerate);
            let scaled = a.map(|v| scale * v + shift);
            let after = pearson_correlation(&scaled, &b).unwrap();
            prop_assert!((base.value - after.value).abs() <= 1e-9);
        }

        #[test]
        fn pearson_bounded(
            xs in proptest::collection::vec(-10.0f64..10.0, 8),
            ys in proptest::collection::vec(-10.0f64..10.0, 8),
        ) {
            let c = pearson_correlation(&arr1(&xs), &arr1(&ys)).unwrap();
            prop_assert!(c.value.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn variance_of_deterministic_estimator_is_zero() {
        let exact = arr1(&[1.0, -2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = estimator_variance(|_| exact.clone(), &exact, 100, &mut rng).unwrap();
        assert_eq!(v.mean, 0.0);
        assert_eq!(v.std_error, 0.0);
    }

    fn mk_trace(eta: f64, objs: &[f64], diverged: bool) -> Trace {
        let mut t = Trace::new("sgd", eta, 0);
        t.diverged = diverged;
        t.records = objs
            .iter()
            .enumerate()
            .map(|(i, &o)| TraceRecord {
                iter: (i as u64 + 1) * 50,
                wall_s: 0.0,
                train_obj: o,
                test_obj: None,
                grad_corr: None,
                est_var: None,
            })
            .collect();
        t
    }

    #[test]
    fn selection_prefers_largest_stable() {
        let f_star = 1.0;
        let good_fast = mk_trace(1.0, &[5.0, 1.005, 1.004], false);
        let good_slow = mk_trace(0.1, &[5.0, 2.0, 1.002], false);
        let bad = mk_trace(10.0, &[5.0, 80.0, 900.0], true);
        let sel =
            select_stable_stepsize(&[&bad, &good_fast, &good_slow], f_star, 0.01).unwrap();
        assert_eq!(sel.eta, 1.0);
        assert!(!sel.fallback);
    }

    #[test]
    fn selection_falls_back_to_smallest() {
        let f_star = 1.0;
        let a = mk_trace(1.0, &[3.0, 2.0], false);
        let b = mk_trace(0.1, &[3.0, 2.5], false);
        let sel = select_stable_stepsize(&[&a, &b], f_star, 0.01).unwrap();
        assert_eq!(sel.eta, 0.1);
        assert!(sel.fallback);
    }

    #[test]
    fn selection_rejects_divergence_even_at_small_eta() {
        let f_star = 1.0;
        let diverged = mk_trace(1.0, &[1.0], true);
        let ok = mk_trace(0.1, &[1.001], false);
        let sel = select_stable_stepsize(&[&diverged, &ok], f_star, 0.01).unwrap();
        assert_eq!(sel.eta, 0.1);
        assert!(!sel.fallback);
    }

    #[test]
    fn trace_csv_round_trip() {
        let mut t = Trace::new("svrg", 0.1, 7);
        t.records = vec![
            TraceRecord {
                iter: 0,
                wall_s: 0.0,
                train_obj: 0.6931471805599453,
                test_obj: Some(0.7),
                grad_corr: None,
                est_var: None,
            },
            TraceRecord {
                iter: 50,
                wall_s: 0.001234,
                train_obj: 0.25,
                test_obj: None,
                grad_corr: Some(0.93),
                est_var: Some(1e-5),
            },
        ];
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,wall_s,train_obj,test_obj,grad_corr,est_var\n"));
        assert!(text.contains("50,0.001234,0.25,,0.93,0.00001\n"));
        let back = Trace::read_csv(std::io::Cursor::new(buf), "mem", "svrg", 0.1, 7).unwrap();
        assert_eq!(back.records, t.records);
    }

    #[test]
    fn trace_csv_rejects_malformed() {
        let bad_header = "iter,wall_s\n1,2\n";
        assert!(Trace::read_csv(std::io::Cursor::new(bad_header), "m", "x", 0.1, 0).is_err());
        let bad_row = format!("{TRACE_HEADER}\n1,2,3\n");
        assert!(Trace::read_csv(std::io::Cursor::new(bad_row), "m", "x", 0.1, 0).is_err());
        let bad_float = format!("{TRACE_HEADER}\n1,z,3,,,\n");
        assert!(Trace::read_csv(std::io::Cursor::new(bad_float), "m", "x", 0.1, 0).is_err());
    }

    #[test]
    fn tail_objective_windows() {
        // 40000 iterations at checkpoint spacing 50: window is min(5000, 10000).
        let objs: Vec<f64> = (1..=800).map(|i| if i > 700 { 1.0 } else { 10.0 }).collect();
        let t = mk_trace(0.1, &objs, false);
        assert_eq!(t.total_iters(), 40000);
        assert_eq!(t.tail_objective(), 1.0);
    }
}
