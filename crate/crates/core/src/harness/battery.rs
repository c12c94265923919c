//! Multi-dataset, multi-k, multi-seed experiment batteries.
//!
//! Experiment spec files use the flat key-value format. Example:
//!
//! ```text
//! # dataset = <name> <source> [skip_header] [n=<features>] [seed=<generator seed>]
//! #   source: csv:<path> | synthetic:<builtin name or mixture spec path>
//! dataset = x1 synthetic:x1 n=2 seed=7
//! dataset = pts csv:data/points.csv skip_header
//! # best_known = <dataset> <k> <f*>
//! best_known = x1 3 171.5
//! k_values = 2,3,5,10
//! n_exec = 15
//! algorithms = bigvns,bigmeans,kmeans
//! sample_size = 70
//! p_max = 4
//! time_limit = 1.5
//! max_iterations = 400
//! seed = 1
//! ```
//!
//! Relative paths are resolved against the spec file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{CsvOptions, DatasetSource, DatasetSpec};
use super::kv;
use super::metrics::{relative_error, RunRecord};
use super::synth::MixtureSpec;
use super::table::RunWriter;
use crate::bigvns::{big_vns_clust, kmeans_full, BigVnsParams};
use crate::error::{Error, Result};
use crate::kmeans::LloydParams;
use crate::model::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    BigVns,
    BigMeans,
    Kmeans,
}

impl std::str::FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bigvns" => Ok(AlgorithmKind::BigVns),
            "bigmeans" => Ok(AlgorithmKind::BigMeans),
            "kmeans" => Ok(AlgorithmKind::Kmeans),
            other => Err(Error::usage(format!(
                "unknown algorithm `{other}` (expected bigvns, bigmeans or kmeans)"
            ))),
        }
    }
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::BigVns => "bigvns",
            AlgorithmKind::BigMeans => "bigmeans",
            AlgorithmKind::Kmeans => "kmeans",
        }
    }
}

/// An algorithm entry of a battery; `label` names it in records.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub label: String,
    pub kind: AlgorithmKind,
    pub p_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub datasets: Vec<DatasetSpec>,
    pub k_values: Vec<usize>,
    pub n_exec: usize,
    pub algorithms: Vec<AlgorithmConfig>,
    pub sample_size: usize,
    pub time_limit: Duration,
    pub max_iterations: Option<usize>,
    pub lloyd: LloydParams,
    pub base_seed: u64,
    /// K-means++/Lloyd restarts used to estimate `f*` when none is given.
    pub fstar_restarts: usize,
}

impl ExperimentSpec {
    pub fn new(datasets: Vec<DatasetSpec>) -> Self {
        Self {
            datasets,
            k_values: vec![2, 3, 5, 10, 15, 20, 25],
            n_exec: 15,
            algorithms: [AlgorithmKind::BigVns, AlgorithmKind::BigMeans]
                .into_iter()
                .map(|kind| AlgorithmConfig {
                    label: kind.name().into(),
                    kind,
                    p_max: 4,
                })
                .collect(),
            sample_size: 1000,
            time_limit: Duration::from_secs(1),
            max_iterations: None,
            lloyd: LloydParams::default(),
            base_seed: 0,
            fstar_restarts: 10,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec = Self::new(Vec::new());
        let mut algorithms: Option<Vec<AlgorithmKind>> = None;
        let mut p_max = 4;
        let mut best_known = Vec::new();
        for e in kv::parse(text)? {
            match e.key.as_str() {
                "name" => {}
                "dataset" => spec.datasets.push(parse_dataset(&e, base_dir)?),
                "best_known" => best_known.push(e),
                "k_values" => spec.k_values = e.parse_list()?,
                "n_exec" => spec.n_exec = e.parse()?,
                "algorithms" => {
                    algorithms = Some(
                        e.value
                            .split(',')
                            .map(|s| s.trim().parse())
                            .collect::<Result<_>>()
                            .map_err(|err| e.error(err.to_string()))?,
                    )
                }
                "sample_size" => spec.sample_size = e.parse()?,
                "p_max" => p_max = e.parse()?,
                "time_limit" => {
                    let secs: f64 = e.parse()?;
                    if !(secs > 0.0 && secs.is_finite()) {
                        return Err(e.error("time_limit must be positive"));
                    }
                    spec.time_limit = Duration::from_secs_f64(secs);
                }
                "max_iterations" => spec.max_iterations = Some(e.parse()?),
                "lloyd_max_iters" => spec.lloyd.max_iters = e.parse()?,
                "lloyd_rel_tol" => spec.lloyd.rel_tol = e.parse()?,
                "candidates" => spec.lloyd.candidates = e.parse()?,
                "seed" => spec.base_seed = e.parse()?,
                "fstar_restarts" => spec.fstar_restarts = e.parse()?,
                other => return Err(e.error(format!("unknown key `{other}`"))),
            }
        }
        if let Some(kinds) = algorithms {
            spec.algorithms = kinds
                .into_iter()
                .map(|kind| AlgorithmConfig {
                    label: kind.name().into(),
                    kind,
                    p_max,
                })
                .collect();
        } else {
            spec.algorithms.iter_mut().for_each(|a| a.p_max = p_max);
        }
        for e in best_known {
            let parts: Vec<&str> = e.value.split_whitespace().collect();
            let [name, k, f] = parts[..] else {
                return Err(e.error("best_known needs `<dataset> <k> <f*>`"));
            };
            let k: usize = k.parse().map_err(|_| e.error("bad k"))?;
            let f: f64 = f.parse().map_err(|_| e.error("bad f*"))?;
            if !(f > 0.0) {
                return Err(e.error("f* must be positive"));
            }
            let ds = spec
                .datasets
                .iter_mut()
                .find(|d| d.name == name)
                .ok_or_else(|| e.error(format!("unknown dataset `{name}`")))?;
            ds.best_known.insert(k, f);
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::usage("experiment needs at least one dataset"));
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return Err(Error::usage("k_values must be a nonempty list of positive counts"));
        }
        if self.n_exec == 0 {
            return Err(Error::usage("n_exec must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::usage("experiment needs at least one algorithm"));
        }
        if self.fstar_restarts == 0 {
            return Err(Error::usage("fstar_restarts must be at least 1"));
        }
        self.lloyd.validate()
    }
}

fn parse_dataset(e: &kv::Entry, base_dir: &Path) -> Result<DatasetSpec> {
    let mut parts = e.value.split_whitespace();
    let (Some(name), Some(source)) = (parts.next(), parts.next()) else {
        return Err(e.error("dataset needs `<name> <source>`"));
    };
    let mut skip_header = false;
    let mut expected_n = None;
    let mut seed = 0;
    for opt in parts {
        match opt.split_once('=') {
            None if opt == "skip_header" => skip_header = true,
            Some(("n", v)) => expected_n = Some(v.parse().map_err(|_| e.error("bad n"))?),
            Some(("seed", v)) => seed = v.parse().map_err(|_| e.error("bad seed"))?,
            _ => return Err(e.error(format!("unknown dataset option `{opt}`"))),
        }
    }
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            base_dir.join(p)
        }
    };
    let source = match source.split_once(':') {
        Some(("csv", path)) => DatasetSource::Csv {
            path: resolve(path),
            options: CsvOptions {
                skip_header,
                ..CsvOptions::default()
            },
        },
        Some(("synthetic", what)) => {
            let spec = match MixtureSpec::builtin(what) {
                Some(s) => s,
                None => MixtureSpec::parse(&std::fs::read_to_string(resolve(what))?)?,
            };
            DatasetSource::Synthetic { spec, seed }
        }
        _ => return Err(e.error(format!("unknown dataset source `{source}`"))),
    };
    Ok(DatasetSpec {
        name: name.to_string(),
        source,
        expected_n,
        best_known: BTreeMap::new(),
    })
}

/// Per-run seed: a fixed 64-bit mix of the base seed and the run coordinates.
pub fn derive_seed(base: u64, dataset: &str, k: usize, algorithm: &str, replicate: usize) -> u64 {
    // FNV-1a over the coordinates, then a splitmix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    eat(&base.to_le_bytes());
    eat(dataset.as_bytes());
    eat(&(k as u64).to_le_bytes());
    eat(algorithm.as_bytes());
    eat(&(replicate as u64).to_le_bytes());
    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Best objective over `restarts` K-means++/Lloyd runs on the full data.
pub fn estimate_best_known(data: &DataMatrix, k: usize, restarts: usize, lloyd: &LloydParams, seed: u64) -> Result<f64> {
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "fstar", k, "kmeans", r));
            kmeans_full(data, k, lloyd, &mut rng).map(|res| res.objective.value())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BestKnownSource {
    Given,
    /// Estimated here by multi-start K-means.
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestKnown {
    pub dataset: String,
    pub k: usize,
    pub value: f64,
    pub source: BestKnownSource,
}

#[derive(Debug, Clone, Default)]
pub struct BatteryOptions {
    /// Worker threads; 0 uses rayon's default.
    pub jobs: usize,
    /// Append every record here as soon as it completes.
    pub runs_csv: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct BatteryOutcome {
    /// Records in (dataset, k, algorithm, replicate) order.
    pub records: Vec<RunRecord>,
    pub best_known: Vec<BestKnown>,
}

struct Task<'a> {
    index: usize,
    dataset: &'a str,
    data: &'a DataMatrix,
    f_star: f64,
    k: usize,
    algorithm: &'a AlgorithmConfig,
    seed: u64,
}

fn run_one(spec: &ExperimentSpec, task: &Task<'_>) -> RunRecord {
    let start = Instant::now();
    let outcome = match task.algorithm.kind {
        AlgorithmKind::Kmeans => {
            let mut rng = ChaCha8Rng::seed_from_u64(task.seed);
            kmeans_full(task.data, task.k, &spec.lloyd, &mut rng)
        }
        kind => {
            let params = BigVnsParams {
                k: task.k,
                sample_size: spec.sample_size,
                p_max: task.algorithm.p_max.min(task.k),
                time_limit: spec.time_limit,
                max_iterations: spec.max_iterations,
                lloyd: spec.lloyd,
                seed: task.seed,
                baseline_mode: kind == AlgorithmKind::BigMeans,
            };
            big_vns_clust(task.data, &params)
        }
    };
    let time_s = start.elapsed().as_secs_f64();
    let (objective, error) = match outcome {
        Ok(r) => (Some(r.objective.value()), None),
        Err(e) => {
            log::warn!(
                "run failed: dataset={} k={} algorithm={} seed={}: {e}",
                task.dataset,
                task.k,
                task.algorithm.label,
                task.seed
            );
            (None, Some(e.to_string()))
        }
    };
    RunRecord {
        dataset: task.dataset.to_string(),
        k: task.k,
        algorithm: task.algorithm.label.clone(),
        seed: task.seed,
        objective,
        epsilon: objective.and_then(|f| relative_error(f, task.f_star).ok()),
        time_s,
        error,
    }
}

/// Runs every (dataset, k, algorithm, replicate) cell.
///
/// Replicates run concurrently on a rayon pool; records stream through one collector
/// that appends them to `options.runs_csv`. A failed run is recorded and the battery
/// continues.
pub fn run_battery(spec: &ExperimentSpec, options: &BatteryOptions) -> Result<BatteryOutcome> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::usage(format!("cannot build thread pool: {e}")))?;

    let datasets: Vec<DataMatrix> = spec.datasets.iter().map(DatasetSpec::load).collect::<Result<_>>()?;

    let mut best_known = Vec::new();
    for (ds, data) in spec.datasets.iter().zip(&datasets) {
        for &k in &spec.k_values {
            let known = match ds.best_known.get(&k) {
                Some(&value) => BestKnown {
                    dataset: ds.name.clone(),
                    k,
                    value,
                    source: BestKnownSource::Given,
                },
                None => {
                    let seed = derive_seed(spec.base_seed, &ds.name, k, "fstar", 0);
                    let value = pool.install(|| estimate_best_known(data, k, spec.fstar_restarts, &spec.lloyd, seed))?;
                    if !(value > 0.0) {
                        return Err(Error::usage(format!(
                            "dataset {} has zero objective at k={k}; relative error undefined",
                            ds.name
                        )));
                    }
                    BestKnown {
                        dataset: ds.name.clone(),
                        k,
                        value,
                        source: BestKnownSource::Local,
                    }
                }
            };
            best_known.push(known);
        }
    }

    let mut tasks = Vec::new();
    for (d, (ds, data)) in spec.datasets.iter().zip(&datasets).enumerate() {
        for (ki, &k) in spec.k_values.iter().enumerate() {
            let f_star = best_known[d * spec.k_values.len() + ki].value;
            for algorithm in &spec.algorithms {
                for r in 0..spec.n_exec {
                    tasks.push(Task {
                        index: tasks.len(),
                        dataset: &ds.name,
                        data,
                        f_star,
                        k,
                        algorithm,
                        seed: derive_seed(spec.base_seed, &ds.name, k, &algorithm.label, r),
                    });
                }
            }
        }
    }

    let mut writer = options.runs_csv.as_ref().map(RunWriter::create).transpose()?;
    let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();
    let mut slots: Vec<Option<RunRecord>> = vec![None; tasks.len()];
    let write_result = std::thread::scope(|scope| {
        let collector = scope.spawn(|| -> Result<()> {
            for (i, record) in rx {
                if let Some(w) = writer.as_mut() {
                    w.write(&record)?;
                }
                slots[i] = Some(record);
            }
            Ok(())
        });
        pool.install(|| {
            tasks.par_iter().for_each_with(tx, |tx, task| {
                let record = run_one(spec, task);
                let _ = tx.send((task.index, record));
            })
        });
        collector.join().expect("collector thread panicked")
    });
    write_result?;

    Ok(BatteryOutcome {
        records: slots.into_iter().map(|r| r.expect("every task reports")).collect(),
        best_known,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn seeds_distinct_across_coordinates() {
        let mut seen = HashSet::new();
        for ds in ["a", "b", "x1"] {
            for k in [2, 3, 5, 10] {
                for algo in ["bigvns", "bigmeans", "kmeans"] {
                    for r in 0..20 {
                        assert!(seen.insert(derive_seed(7, ds, k, algo, r)));
                    }
                }
            }
        }
        assert_ne!(derive_seed(1, "a", 2, "bigvns", 0), derive_seed(2, "a", 2, "bigvns", 0));
        assert_eq!(derive_seed(1, "a", 2, "bigvns", 0), derive_seed(1, "a", 2, "bigvns", 0));
    }

    #[test]
    fn parses_spec_file() {
        let text = "\
dataset = x1 synthetic:x1 n=2 seed=3
best_known = x1 3 171.5
k_values = 2,3
n_exec = 4
algorithms = bigvns, kmeans
p_max = 2
time_limit = 0.5
max_iterations = 10
seed = 9
";
        let spec = ExperimentSpec::parse(text, Path::new(".")).unwrap();
        assert_eq!(spec.k_values, vec![2, 3]);
        assert_eq!(spec.n_exec, 4);
        assert_eq!(spec.algorithms.len(), 2);
        assert_eq!(spec.algorithms[0].p_max, 2);
        assert_eq!(spec.algorithms[1].kind, AlgorithmKind::Kmeans);
        assert_eq!(spec.datasets[0].best_known.get(&3), Some(&171.5));
        assert_eq!(spec.max_iterations, Some(10));
        assert_eq!(spec.time_limit, Duration::from_millis(500));
        assert!(matches!(spec.datasets[0].source, DatasetSource::Synthetic { seed: 3, .. }));
    }

    #[test]
    fn spec_errors_carry_line_numbers() {
        match ExperimentSpec::parse("dataset = x1 synthetic:x1\nalgorithms = foo\n", Path::new(".")) {
            Err(Error::SpecFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(ExperimentSpec::parse("k_values = 2\n", Path::new(".")).is_err());
        assert!(ExperimentSpec::parse("dataset = x1 synthetic:x1\nbest_known = x1 3 0\n", Path::new(".")).is_err());
    }
}
