//! Relative error, per-cell statistics and success counting.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Outcome of one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub k: usize,
    pub algorithm: String,
    pub seed: u64,
    /// Full-data objective; `None` when the run failed.
    pub objective: Option<f64>,
    /// Relative error in percent; `None` when `f*` is unknown or the run failed.
    pub epsilon: Option<f64>,
    pub time_s: f64,
    pub error: Option<String>,
}

/// `ε = 100 · (f − f*) / f*`, in percent. Negative when `f` beats `f*`.
pub fn relative_error(f: f64, f_star: f64) -> Result<f64> {
    if !(f_star > 0.0) || !f_star.is_finite() {
        return Err(Error::usage(format!("best known objective must be positive, got {f_star}")));
    }
    Ok(100.0 * (f - f_star) / f_star)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Stats {
    /// Min, median and max; the median of an even count is the mean of the two middle values.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        let median = if v.len().is_multiple_of(2) {
            (v[mid - 1] + v[mid]) / 2.0
        } else {
            v[mid]
        };
        Some(Stats {
            min: v[0],
            median,
            max: v[v.len() - 1],
        })
    }

    fn nan() -> Stats {
        Stats {
            min: f64::NAN,
            median: f64::NAN,
            max: f64::NAN,
        }
    }

    fn mean_of(all: &[Stats]) -> Stats {
        let n = all.len() as f64;
        Stats {
            min: all.iter().map(|s| s.min).sum::<f64>() / n,
            median: all.iter().map(|s| s.median).sum::<f64>() / n,
            max: all.iter().map(|s| s.max).sum::<f64>() / n,
        }
    }
}

/// Per-(dataset, algorithm) summary: statistics averaged over the `k` values.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dataset: String,
    pub algorithm: String,
    /// `k` values at which the median ε matched or beat every algorithm.
    pub succ: usize,
    pub total: usize,
    pub eps: Stats,
    /// Same success rule applied to the median time.
    pub t_succ: usize,
    pub time: Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Epsilon,
    Time,
}

impl Metric {
    fn of(self, r: &RunRecord) -> Option<f64> {
        if r.error.is_some() {
            return None;
        }
        match self {
            Metric::Epsilon => r.epsilon,
            Metric::Time => Some(r.time_s),
        }
    }
}

fn cell_values(records: &[RunRecord], dataset: &str, algorithm: &str, k: usize, metric: Metric) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.dataset == dataset && r.algorithm == algorithm && r.k == k)
        .filter_map(|r| metric.of(r))
        .collect()
}

fn median_of(records: &[RunRecord], dataset: &str, algorithm: &str, k: usize, metric: Metric) -> Option<f64> {
    Stats::of(&cell_values(records, dataset, algorithm, k, metric)).map(|s| s.median)
}

/// Counts the `k` values where `algorithm`'s median matches or beats every algorithm's.
pub fn count_succ_by(
    records: &[RunRecord],
    dataset: &str,
    algorithm: &str,
    k_values: &[usize],
    metric: Metric,
) -> (usize, usize) {
    let algorithms: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.dataset == dataset)
        .map(|r| r.algorithm.as_str())
        .collect();
    let succ = k_values
        .iter()
        .filter(|&&k| {
            let Some(mine) = median_of(records, dataset, algorithm, k, metric) else {
                return false;
            };
            algorithms
                .iter()
                .filter_map(|a| median_of(records, dataset, a, k, metric))
                .all(|other| mine <= other)
        })
        .count();
    (succ, k_values.len())
}

/// `#Succ` on the relative error.
pub fn count_succ(records: &[RunRecord], dataset: &str, algorithm: &str, k_values: &[usize]) -> (usize, usize) {
    count_succ_by(records, dataset, algorithm, k_values, Metric::Epsilon)
}

/// Per-(dataset, algorithm) rows, sorted by dataset then algorithm.
///
/// Statistics are computed per `k` over replicates and then averaged without weights
/// across `k`. Failed runs are ignored; a cell with no successful run is an error.
pub fn aggregate(records: &[RunRecord], k_values: &[usize]) -> Result<Vec<AggregateRow>> {
    if k_values.is_empty() {
        return Err(Error::usage("aggregation needs at least one k value"));
    }
    let cells: BTreeMap<(&str, &str), ()> = records
        .iter()
        .map(|r| ((r.dataset.as_str(), r.algorithm.as_str()), ()))
        .collect();

    let mut missing = Vec::new();
    let mut rows = Vec::new();
    for &(dataset, algorithm) in cells.keys() {
        let mut eps = Vec::new();
        let mut time = Vec::new();
        for &k in k_values {
            match Stats::of(&cell_values(records, dataset, algorithm, k, Metric::Time)) {
                Some(t) => {
                    time.push(t);
                    eps.push(
                        Stats::of(&cell_values(records, dataset, algorithm, k, Metric::Epsilon))
                            .unwrap_or_else(Stats::nan),
                    );
                }
                None => missing.push(format!("{dataset}/{algorithm}/k={k}")),
            }
        }
        if eps.len() < k_values.len() {
            continue;
        }
        let (succ, total) = count_succ_by(records, dataset, algorithm, k_values, Metric::Epsilon);
        let (t_succ, _) = count_succ_by(records, dataset, algorithm, k_values, Metric::Time);
        rows.push(AggregateRow {
            dataset: dataset.to_string(),
            algorithm: algorithm.to_string(),
            succ,
            total,
            eps: Stats::mean_of(&eps),
            t_succ,
            time: Stats::mean_of(&time),
        });
    }
    if !missing.is_empty() {
        return Err(Error::Aggregation { missing });
    }
    Ok(rows)
}

/// Collapses rows across datasets: successes summed, statistics averaged.
pub fn summarize(rows: &[AggregateRow]) -> Vec<AggregateRow> {
    let mut by_algo: BTreeMap<&str, Vec<&AggregateRow>> = BTreeMap::new();
    for r in rows {
        by_algo.entry(r.algorithm.as_str()).or_default().push(r);
    }
    by_algo
        .into_iter()
        .map(|(algorithm, group)| {
            let eps: Vec<Stats> = group.iter().map(|r| r.eps).collect();
            let time: Vec<Stats> = group.iter().map(|r| r.time).collect();
            AggregateRow {
                dataset: "overall".into(),
                algorithm: algorithm.to_string(),
                succ: group.iter().map(|r| r.succ).sum(),
                total: group.iter().map(|r| r.total).sum(),
                eps: Stats::mean_of(&eps),
                t_succ: group.iter().map(|r| r.t_succ).sum(),
                time: Stats::mean_of(&time),
            }
        })
        .collect()
}
