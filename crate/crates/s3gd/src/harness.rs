//! Experiment harness: a sectioned key=value config format, a multi-threaded
//! run matrix (algorithm x step size x repeat), trace and manifest emission,
//! and a summary generator that works purely from the files on disk so that
//! re-summarizing a results directory reproduces `summary.csv` exactly.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::anchors::SigmaRule;
use crate::data::{load_libsvm, synth_gaussian, write_libsvm, Dataset, SynthSpec};
use crate::diagnostics::{select_stable_stepsize, Trace};
use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::optim::{
    reference_minimum, run, Algorithm, AnchorConfig, RunConfig, RunOutput, SnapshotRule,
};
use crate::prox::Regularizer;

/// Environment variable bounding the number of worker threads used by
/// [`run_experiment`].
pub const WORKERS_ENV: &str = "S3GD_WORKERS";

/// Column set of `summary.csv`.
pub const SUMMARY_HEADER: &str = "algorithm,eta,runs,diverged,tail_obj_mean,grad_corr_mean,wall_per_50_s,preprocess_s_mean,selected,fallback";

const MANIFEST_HEADER: &str = "run,algorithm,eta,seed,rep,diverged,preprocess_s,trace_file";
const EXPERIMENT_HEADER: &str = "name,f_star,epsilon";

/// Where the training data comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Synthetic(SynthSpec),
    Libsvm(PathBuf),
}

/// Fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub etas: Vec<f64>,
    pub repeats: usize,
    /// Relative tolerance of the step-size stability rule.
    pub epsilon: f64,
    pub p: usize,
    pub k_in: usize,
    /// Inner-loop length used by SVRG runs (exact snapshots amortize over a
    /// longer inner loop than anchored ones).
    pub k_in_svrg: usize,
    pub total_iters: usize,
    pub checkpoint_every: usize,
    pub snapshot_rule: SnapshotRule,
    pub record_correlation: bool,
    pub variance_trials: usize,
    pub divergence_factor: f64,
    pub source: DataSource,
    pub class_weights: bool,
    pub unit_norm: bool,
    pub test_fraction: f64,
    pub test_path: Option<PathBuf>,
    pub loss: Loss,
    pub regularizer: Regularizer,
    pub anchors: AnchorConfig,
    pub reference_tol: f64,
    pub reference_max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            etas: vec![0.1, 1.0, 5.0, 10.0],
            repeats: 1,
            epsilon: 0.01,
            p: 10,
            k_in: 20,
            k_in_svrg: 50,
            total_iters: 20_000,
            checkpoint_every: 50,
            snapshot_rule: SnapshotRule::Last,
            record_correlation: false,
            variance_trials: 0,
            divergence_factor: 1e3,
            source: DataSource::Synthetic(SynthSpec {
                n: 2000,
                d: 20,
                clusters: 10,
                separation: 4.0,
                seed: 1,
            }),
            class_weights: false,
            unit_norm: false,
            test_fraction: 0.0,
            test_path: None,
            loss: Loss::Logistic,
            regularizer: Regularizer::tikhonov(1e-3).expect("valid default"),
            anchors: AnchorConfig::default(),
            reference_tol: 1e-8,
            reference_max_iter: 500_000,
        }
    }
}

struct Entries {
    map: BTreeMap<(String, String), (String, usize)>,
}

impl Entries {
    fn tokenize(text: &str, origin: &str) -> Result<Self> {
        const SECTIONS: [&str; 5] = ["experiment", "data", "loss", "regularizer", "anchors"];
        let mut section = "experiment".to_string();
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let loc = || format!("{origin}:{line}");
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            if let Some(rest) = stripped.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(loc(), "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::parse(
                        loc(),
                        format!("unknown section {name:?}, expected one of {SECTIONS:?}"),
                    ));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or_else(|| Error::parse(loc(), "expected `key = value`"))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(loc(), "empty key"));
            }
            if map
                .insert((section.clone(), key.clone()), (value.trim().to_string(), line))
                .is_some()
            {
                return Err(Error::parse(
                    loc(),
                    format!("duplicate key {key:?} in section [{section}]"),
                ));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.map.remove(&(section.to_string(), key.to_string()))
    }

    fn finish(self, origin: &str) -> Result<()> {
        if let Some(((section, key), (_, line))) = self
            .map
            .into_iter()
            .min_by_key(|(_, (_, line))| *line)
        {
            return Err(Error::parse(
                format!("{origin}:{line}"),
                format!("unknown key {key:?} in section [{section}]"),
            ));
        }
        Ok(())
    }
}

fn parse_at<T: std::str::FromStr>(value: &str, origin: &str, line: usize, what: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| {
        Error::parse(
            format!("{origin}:{line}"),
            format!("bad {what} value {value:?}"),
        )
    })
}

fn parse_bool(value: &str, origin: &str, line: usize) -> Result<bool> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::parse(
            format!("{origin}:{line}"),
            format!("expected true or false, got {other:?}"),
        )),
    }
}

macro_rules! set_field {
    ($entries:ident, $origin:ident, $section:literal, $key:literal, $target:expr, $what:literal) => {
        if let Some((v, line)) = $entries.take($section, $key) {
            $target = parse_at(&v, $origin, line, $what)?;
        }
    };
}

impl ExperimentConfig {
    /// Parses the sectioned key=value config format. Every key is optional;
    /// unknown keys and malformed values are reported with `origin:line`
    /// locations.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut e = Entries::tokenize(text, origin)?;
        let mut cfg = ExperimentConfig::default();

        if let Some((v, line)) = e.take("experiment", "name") {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::parse(
                    format!("{origin}:{line}"),
                    format!("name must be [A-Za-z0-9_-]+, got {v:?}"),
                ));
            }
            cfg.name = v;
        }
        set_field!(e, origin, "experiment", "seed", cfg.seed, "integer");
        if let Some((v, line)) = e.take("experiment", "algorithms") {
            if v.trim() == "all" {
                cfg.algorithms = Algorithm::ALL.to_vec();
            } else {
                cfg.algorithms = v
                    .split(',')
                    .map(|s| {
                        Algorithm::parse(s.trim()).map_err(|_| {
                            Error::parse(
                                format!("{origin}:{line}"),
                                format!("unknown algorithm {:?}", s.trim()),
                            )
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            if cfg.algorithms.is_empty() {
                return Err(Error::parse(
                    format!("{origin}:{line}"),
                    "algorithm list is empty",
                ));
            }
        }
        if let Some((v, line)) = e.take("experiment", "etas") {
            cfg.etas = v
                .split(',')
                .map(|s| parse_at::<f64>(s, origin, line, "eta"))
                .collect::<Result<Vec<_>>>()?;
            if cfg.etas.is_empty() || cfg.etas.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::parse(
                    format!("{origin}:{line}"),
                    "etas must be a non-empty list of positive numbers",
                ));
            }
        }
        set_field!(e, origin, "experiment", "repeats", cfg.repeats, "integer");
        set_field!(e, origin, "experiment", "epsilon", cfg.epsilon, "number");
        set_field!(e, origin, "experiment", "p", cfg.p, "integer");
        set_field!(e, origin, "experiment", "k_in", cfg.k_in, "integer");
        set_field!(e, origin, "experiment", "k_in_svrg", cfg.k_in_svrg, "integer");
        set_field!(e, origin, "experiment", "total_iters", cfg.total_iters, "integer");
        set_field!(
            e,
            origin,
            "experiment",
            "checkpoint_every",
            cfg.checkpoint_every,
            "integer"
        );
        if let Some((v, line)) = e.take("experiment", "snapshot_rule") {
            cfg.snapshot_rule = SnapshotRule::parse(v.trim()).map_err(|_| {
                Error::parse(format!("{origin}:{line}"), format!("unknown snapshot rule {v:?}"))
            })?;
        }
        if let Some((v, line)) = e.take("experiment", "record_correlation") {
            cfg.record_correlation = parse_bool(&v, origin, line)?;
        }
        set_field!(
            e,
            origin,
            "experiment",
            "variance_trials",
            cfg.variance_trials,
            "integer"
        );
        set_field!(
            e,
            origin,
            "experiment",
            "divergence_factor",
            cfg.divergence_factor,
            "number"
        );
        set_field!(e, origin, "experiment", "reference_tol", cfg.reference_tol, "number");
        set_field!(
            e,
            origin,
            "experiment",
            "reference_max_iter",
            cfg.reference_max_iter,
            "integer"
        );
        if cfg.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }

        let mut synth = SynthSpec {
            n: 2000,
            d: 20,
            clusters: 10,
            separation: 4.0,
            seed: 1,
        };
        let mut source_kind = "synthetic".to_string();
        let mut libsvm_path: Option<PathBuf> = None;
        if let Some((v, line)) = e.take("data", "source") {
            match v.trim() {
                "synthetic" | "libsvm" => source_kind = v.trim().to_string(),
                other => {
                    return Err(Error::parse(
                        format!("{origin}:{line}"),
                        format!("source must be synthetic or libsvm, got {other:?}"),
                    ))
                }
            }
        }
        if let Some((v, _)) = e.take("data", "path") {
            libsvm_path = Some(PathBuf::from(v));
        }
        set_field!(e, origin, "data", "n", synth.n, "integer");
        set_field!(e, origin, "data", "d", synth.d, "integer");
        set_field!(e, origin, "data", "clusters", synth.clusters, "integer");
        set_field!(e, origin, "data", "separation", synth.separation, "number");
        set_field!(e, origin, "data", "data_seed", synth.seed, "integer");
        if let Some((v, line)) = e.take("data", "class_weights") {
            cfg.class_weights = parse_bool(&v, origin, line)?;
        }
        if let Some((v, line)) = e.take("data", "unit_norm") {
            cfg.unit_norm = parse_bool(&v, origin, line)?;
        }
        set_field!(e, origin, "data", "test_fraction", cfg.test_fraction, "number");
        if let Some((v, _)) = e.take("data", "test_path") {
            cfg.test_path = Some(PathBuf::from(v));
        }
        cfg.source = match source_kind.as_str() {
            "synthetic" => DataSource::Synthetic(synth),
            _ => DataSource::Libsvm(libsvm_path.ok_or_else(|| {
                Error::Config("source = libsvm requires a path key in [data]".into())
            })?),
        };
        if !(0.0..1.0).contains(&cfg.test_fraction) {
            return Err(Error::Config(format!(
                "test_fraction must be in [0, 1), got {}",
                cfg.test_fraction
            )));
        }

        let mut loss_kind = "logistic".to_string();
        let mut beta = 10.0;
        if let Some((v, _)) = e.take("loss", "kind") {
            loss_kind = v;
        }
        set_field!(e, origin, "loss", "beta", beta, "number");
        cfg.loss = match loss_kind.as_str() {
            "logistic" => Loss::Logistic,
            "smoothed_hinge" => Loss::smoothed_hinge(beta)?,
            "squared_hinge" => Loss::SquaredHinge,
            other => {
                return Err(Error::Config(format!(
                    "unknown loss {other:?}, expected logistic, smoothed_hinge or squared_hinge"
                )))
            }
        };

        let mut reg_kind = "tikhonov".to_string();
        let mut lambda = 1e-3;
        let mut alpha = 0.5;
        if let Some((v, _)) = e.take("regularizer", "kind") {
            reg_kind = v;
        }
        set_field!(e, origin, "regularizer", "lambda", lambda, "number");
        set_field!(e, origin, "regularizer", "alpha", alpha, "number");
        cfg.regularizer = match reg_kind.as_str() {
            "tikhonov" => Regularizer::tikhonov(lambda)?,
            "l1" => Regularizer::l1(lambda)?,
            "elastic_net" => Regularizer::elastic_net(lambda, alpha)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown regularizer {other:?}, expected tikhonov, l1 or elastic_net"
                )))
            }
        };

        set_field!(e, origin, "anchors", "m", cfg.anchors.m, "integer");
        set_field!(e, origin, "anchors", "k", cfg.anchors.k, "integer");
        set_field!(
            e,
            origin,
            "anchors",
            "kmeans_max_iter",
            cfg.anchors.kmeans_max_iter,
            "integer"
        );
        set_field!(e, origin, "anchors", "seed", cfg.anchors.seed, "integer");
        if let Some((v, line)) = e.take("anchors", "sigma_rule") {
            cfg.anchors.sigma_rule = match v.trim() {
                "as_printed" => SigmaRule::AsPrinted,
                "unrooted" => SigmaRule::Unrooted,
                other => {
                    return Err(Error::parse(
                        format!("{origin}:{line}"),
                        format!("sigma_rule must be as_printed or unrooted, got {other:?}"),
                    ))
                }
            };
        }

        e.finish(origin)?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Materializes the train set (and optional held-out set) with all
    /// configured transforms applied.
    pub fn load_dataset(&self) -> Result<(Dataset, Option<Dataset>)> {
        let full = match &self.source {
            DataSource::Synthetic(spec) => synth_gaussian(*spec)?,
            DataSource::Libsvm(path) => load_libsvm(path)?,
        };
        let full = if self.unit_norm { full.unit_normalized() } else { full };
        let (train, test) = if let Some(tp) = &self.test_path {
            let t = load_libsvm(tp)?;
            let t = if self.unit_norm { t.unit_normalized() } else { t };
            if t.dim() != full.dim() {
                return Err(Error::Dimension {
                    expected: full.dim(),
                    got: t.dim(),
                });
            }
            (full, Some(t))
        } else if self.test_fraction > 0.0 {
            let count = ((full.len() as f64 * self.test_fraction).round() as usize).max(1);
            let (train, test) = full.split_tail(count)?;
            (train, Some(test))
        } else {
            (full, None)
        };
        if self.class_weights {
            let train = train.with_class_weights()?;
            let test = test.map(|t| t.with_class_weights()).transpose()?;
            Ok((train, test))
        } else {
            Ok((train, test))
        }
    }

    /// Run parameters for one cell of the experiment matrix.
    pub fn run_config(&self, algorithm: Algorithm, eta: f64, rep: usize) -> RunConfig {
        RunConfig {
            eta,
            p: self.p,
            k_in: if algorithm == Algorithm::Svrg {
                self.k_in_svrg
            } else {
                self.k_in
            },
            total_iters: self.total_iters,
            checkpoint_every: self.checkpoint_every,
            seed: self.seed.wrapping_add(rep as u64),
            snapshot_rule: self.snapshot_rule,
            record_correlation: self.record_correlation,
            variance_trials: self.variance_trials,
            divergence_factor: self.divergence_factor,
        }
    }
}

fn worker_count(jobs: usize) -> Result<usize> {
    let requested = match env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| {
            Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))
        })?,
        Err(env::VarError::NotPresent) => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
        Err(e) => return Err(Error::Config(format!("{WORKERS_ENV}: {e}"))),
    };
    Ok(requested.min(jobs).max(1))
}

struct Job {
    algorithm: Algorithm,
    eta: f64,
    rep: usize,
    cfg: RunConfig,
}

/// Runs the full experiment matrix into `out_dir`: one trace CSV per run, a
/// `runs.csv` manifest, an `experiment.csv` with the reference optimum, and a
/// `summary.csv`. Returns the summary text. Worker threads are bounded by the
/// `S3GD_WORKERS` environment variable.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<String> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let (train, test) = cfg.load_dataset()?;
    let (_, f_star) = reference_minimum(
        &train,
        &cfg.loss,
        &cfg.regularizer,
        cfg.reference_tol,
        cfg.reference_max_iter,
    )?;

    let mut jobs = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &eta in &cfg.etas {
            for rep in 0..cfg.repeats {
                jobs.push(Job {
                    algorithm,
                    eta,
                    rep,
                    cfg: cfg.run_config(algorithm, eta, rep),
                });
            }
        }
    }
    let workers = worker_count(jobs.len())?;
    let results: Mutex<Vec<Option<Result<RunOutput>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let out = run(
                    job.algorithm,
                    &job.cfg,
                    &cfg.anchors,
                    &train,
                    &cfg.loss,
                    &cfg.regularizer,
                    test.as_ref(),
                );
                results.lock().expect("no poisoned lock")[i] = Some(out);
            });
        }
    });

    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    let results = results.into_inner().expect("no poisoned lock");
    for (i, (job, slot)) in jobs.iter().zip(results).enumerate() {
        let out = slot.expect("every job ran")?;
        let trace_file = format!("trace_{i:03}_{}.csv", job.algorithm.name());
        out.trace.write_csv_path(out_dir.join(&trace_file))?;
        manifest.push_str(&format!(
            "{i},{},{},{},{},{},{},{trace_file}\n",
            job.algorithm.name(),
            job.eta,
            job.cfg.seed,
            job.rep,
            u8::from(out.trace.diverged),
            out.trace.preprocess_s,
        ));
    }
    fs::write(out_dir.join("runs.csv"), manifest)?;
    fs::write(
        out_dir.join("experiment.csv"),
        format!("{EXPERIMENT_HEADER}\n{},{},{}\n", cfg.name, f_star, cfg.epsilon),
    )?;

    let summary = summarize(out_dir)?;
    fs::write(out_dir.join("summary.csv"), &summary)?;
    Ok(summary)
}

struct ManifestRow {
    algorithm: Algorithm,
    eta: f64,
    seed: u64,
    diverged: bool,
    preprocess_s: f64,
    trace_file: String,
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == MANIFEST_HEADER => {}
        got => {
            return Err(Error::parse(
                &origin,
                format!("expected header {MANIFEST_HEADER:?}, got {got:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let loc = format!("{origin}:{}", idx + 2);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(&loc, format!("expected 8 fields, got {}", f.len())));
        }
        rows.push(ManifestRow {
            algorithm: Algorithm::parse(f[1])
                .map_err(|_| Error::parse(&loc, format!("unknown algorithm {:?}", f[1])))?,
            eta: f[2]
                .parse()
                .map_err(|_| Error::parse(&loc, format!("bad eta {:?}", f[2])))?,
            seed: f[3]
                .parse()
                .map_err(|_| Error::parse(&loc, format!("bad seed {:?}", f[3])))?,
            diverged: match f[5] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(&loc, format!("bad diverged flag {other:?}"))),
            },
            preprocess_s: f[6]
                .parse()
                .map_err(|_| Error::parse(&loc, format!("bad preprocess_s {:?}", f[6])))?,
            trace_file: f[7].to_string(),
        });
    }
    Ok(rows)
}

fn read_experiment_meta(path: &Path) -> Result<(String, f64, f64)> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == EXPERIMENT_HEADER => {}
        got => {
            return Err(Error::parse(
                &origin,
                format!("expected header {EXPERIMENT_HEADER:?}, got {got:?}"),
            ))
        }
    }
    let row = lines
        .next()
        .ok_or_else(|| Error::parse(&origin, "missing metadata row"))?;
    let f: Vec<&str> = row.split(',').collect();
    if f.len() != 3 {
        return Err(Error::parse(&origin, format!("expected 3 fields, got {}", f.len())));
    }
    let f_star: f64 = f[1]
        .parse()
        .map_err(|_| Error::parse(&origin, format!("bad f_star {:?}", f[1])))?;
    let epsilon: f64 = f[2]
        .parse()
        .map_err(|_| Error::parse(&origin, format!("bad epsilon {:?}", f[2])))?;
    Ok((f[0].to_string(), f_star, epsilon))
}

fn fmt_opt_mean(values: &[f64]) -> String {
    if values.is_empty() {
        String::new()
    } else {
        (values.iter().sum::<f64>() / values.len() as f64).to_string()
    }
}

/// Rebuilds the summary table from a results directory written by
/// [`run_experiment`]. Rows are grouped per (algorithm, eta), ordered by the
/// fixed algorithm order and descending step size, with the stability-selected
/// step size flagged per algorithm.
pub fn summarize(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let (_name, f_star, epsilon) = read_experiment_meta(&dir.join("experiment.csv"))?;
    let manifest = read_manifest(&dir.join("runs.csv"))?;
    let mut traces: Vec<Trace> = Vec::with_capacity(manifest.len());
    for row in &manifest {
        let mut t = Trace::read_csv_path(
            dir.join(&row.trace_file),
            row.algorithm.name(),
            row.eta,
            row.seed,
        )?;
        t.diverged = row.diverged;
        t.preprocess_s = row.preprocess_s;
        traces.push(t);
    }

    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for algorithm in Algorithm::ALL {
        let of_alg: Vec<&Trace> = traces
            .iter()
            .filter(|t| t.algorithm == algorithm.name())
            .collect();
        if of_alg.is_empty() {
            continue;
        }
        let selection = select_stable_stepsize(&of_alg, f_star, epsilon)?;
        let mut etas: Vec<f64> = of_alg.iter().map(|t| t.eta).collect();
        etas.sort_by(|a, b| b.partial_cmp(a).expect("finite etas"));
        etas.dedup();
        for eta in etas {
            let group: Vec<&&Trace> = of_alg.iter().filter(|t| t.eta == eta).collect();
            let diverged = group.iter().filter(|t| t.diverged).count();
            let tails: Vec<f64> = group.iter().map(|t| t.tail_objective()).collect();
            let corrs: Vec<f64> = group.iter().filter_map(|t| t.mean_grad_corr()).collect();
            let walls: Vec<f64> = group.iter().map(|t| t.wall_per_50()).collect();
            let preps: Vec<f64> = group.iter().map(|t| t.preprocess_s).collect();
            let selected = selection.eta == eta;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                algorithm.name(),
                eta,
                group.len(),
                diverged,
                fmt_opt_mean(&tails),
                fmt_opt_mean(&corrs),
                fmt_opt_mean(&walls),
                fmt_opt_mean(&preps),
                u8::from(selected),
                u8::from(selected && selection.fallback),
            ));
        }
    }
    Ok(out)
}

/// Parses a generator spec of the form
/// `n=2000,d=20,clusters=10,separation=4.0,seed=1` (n and d required) and
/// writes the sampled dataset in LIBSVM format. Returns (samples, raw
/// dimension).
pub fn gen_data(spec: &str, out: impl AsRef<Path>) -> Result<(usize, usize)> {
    let parsed = parse_synth_spec(spec)?;
    let ds = synth_gaussian(parsed)?;
    write_libsvm(&ds, out)?;
    Ok((ds.len(), ds.dim() - 1))
}

fn parse_synth_spec(spec: &str) -> Result<SynthSpec> {
    let mut out = SynthSpec {
        n: 0,
        d: 0,
        clusters: 2,
        separation: 3.0,
        seed: 0,
    };
    let mut seen_n = false;
    let mut seen_d = false;
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in data spec, got {part:?}")))?;
        let bad = |what: &str| Error::Config(format!("bad {what} in data spec: {value:?}"));
        match key.trim() {
            "n" => {
                out.n = value.trim().parse().map_err(|_| bad("n"))?;
                seen_n = true;
            }
            "d" => {
                out.d = value.trim().parse().map_err(|_| bad("d"))?;
                seen_d = true;
            }
            "clusters" => out.clusters = value.trim().parse().map_err(|_| bad("clusters"))?,
            "separation" => out.separation = value.trim().parse().map_err(|_| bad("separation"))?,
            "seed" => out.seed = value.trim().parse().map_err(|_| bad("seed"))?,
            other => return Err(Error::Config(format!("unknown data spec key {other:?}"))),
        }
    }
    if !seen_n || !seen_d {
        return Err(Error::Config("data spec requires n= and d=".into()));
    }
    Ok(out)
}
