//! Variable neighborhood search over sample-restricted clustering landscapes.
//!
//! Each iteration draws a fresh uniform sample `S`, shakes the incumbent centroids by
//! re-seeding every degenerate slot plus `p` randomly chosen slots with greedy
//! K-means++ on `S`, runs Lloyd on `S`, and keeps the result iff its sample objective
//! beats the best sample objective seen so far. The shaking power `p` cycles through
//! `1..=p_max` whether or not the step was accepted.
//!
//! With `baseline_mode` set, `p` is pinned to 0 and only degenerate slots are re-seeded,
//! which gives the Big-means baseline.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kmeans::{kmeanspp_seed, lloyd, CenterSampler, LloydParams};
use crate::model::{assign_points, draw_sample, Assignment, CentroidSet, DataMatrix, ObjectiveValue, Slot};

/// Fresh samples tried before a degenerate sample becomes a hard failure.
const MAX_SAMPLE_RETRIES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BigVnsParams {
    pub k: usize,
    pub sample_size: usize,
    pub p_max: usize,
    /// Wall-clock budget; checked after every iteration.
    pub time_limit: Duration,
    /// Optional iteration cap. When it binds before the time limit the run is
    /// fully reproducible from `seed`.
    pub max_iterations: Option<usize>,
    pub lloyd: LloydParams,
    pub seed: u64,
    pub baseline_mode: bool,
}

impl BigVnsParams {
    pub fn new(k: usize, sample_size: usize) -> Self {
        Self {
            k,
            sample_size,
            p_max: k.min(3),
            time_limit: Duration::from_secs(1),
            max_iterations: None,
            lloyd: LloydParams::default(),
            seed: 0,
            baseline_mode: false,
        }
    }

    /// Big-means configuration: degenerate repair only.
    pub fn baseline(k: usize, sample_size: usize) -> Self {
        Self {
            baseline_mode: true,
            ..Self::new(k, sample_size)
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        self.lloyd.validate()?;
        if self.k == 0 {
            return Err(Error::usage("k must be at least 1"));
        }
        if self.sample_size == 0 || self.sample_size > m {
            return Err(Error::usage(format!(
                "sample size {} must lie in 1..={m}",
                self.sample_size
            )));
        }
        if self.k > self.sample_size {
            return Err(Error::usage(format!(
                "k={} exceeds sample size {}",
                self.k, self.sample_size
            )));
        }
        if !self.baseline_mode && (self.p_max == 0 || self.p_max > self.k) {
            return Err(Error::usage(format!(
                "p_max={} must lie in 1..={}",
                self.p_max, self.k
            )));
        }
        if self.time_limit.is_zero() || self.max_iterations == Some(0) {
            return Err(Error::usage("time limit and iteration cap must be positive"));
        }
        Ok(())
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub p: usize,
    /// Degenerate slots in the incumbent before shaking.
    pub degenerate_before: usize,
    /// Slots re-seeded by the shake.
    pub replaced: usize,
    pub sample_objective: f64,
    pub accepted: bool,
    /// Best sample objective after this iteration.
    pub best_sample_objective: f64,
    pub lloyd_iterations: usize,
    /// Wall time of this iteration (sampling, shaking and Lloyd).
    pub duration: Duration,
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub centroids: CentroidSet,
    pub labels: Assignment,
    /// Objective over the full dataset.
    pub objective: ObjectiveValue,
    pub iterations: usize,
    pub elapsed: Duration,
    pub trace: Vec<IterationRecord>,
}

/// Result of [`shake_centroids_traced`]: the shaken set and the slots that were re-seeded.
#[derive(Debug, Clone, PartialEq)]
pub struct ShakeReport {
    pub centroids: CentroidSet,
    /// Degenerate slots first (ascending), then the `p` selected slots in draw order.
    pub replaced: Vec<usize>,
}

/// Shakes `centroids` at power `p` on `sample`. See [`shake_centroids_traced`].
pub fn shake_centroids<R: Rng + ?Sized>(
    centroids: &CentroidSet,
    p: usize,
    sample: &DataMatrix,
    params: &LloydParams,
    rng: &mut R,
) -> Result<CentroidSet> {
    shake_centroids_traced(centroids, p, sample, params, rng).map(|r| r.centroids)
}

/// Re-seeds every degenerate slot and `p` distinct non-degenerate slots.
///
/// The `p` slots are drawn uniformly from the non-degenerate ones (all of them when
/// fewer than `p` exist). Slots are re-drawn one at a time with greedy K-means++,
/// each conditioning on the retained centroids plus those already re-drawn.
pub fn shake_centroids_traced<R: Rng + ?Sized>(
    centroids: &CentroidSet,
    p: usize,
    sample: &DataMatrix,
    params: &LloydParams,
    rng: &mut R,
) -> Result<ShakeReport> {
    let k = centroids.len();
    if p > k {
        return Err(Error::usage(format!("shaking power {p} exceeds k={k}")));
    }
    if let Some((j, c)) = centroids.points().find(|(_, c)| c.len() != sample.cols()) {
        return Err(Error::usage(format!(
            "centroid {j} has dimension {}, sample has {}",
            c.len(),
            sample.cols()
        )));
    }
    let mut replaced = centroids.degenerate_indices();
    let live: Vec<usize> = centroids.points().map(|(j, _)| j).collect();
    let p_eff = p.min(live.len());
    let chosen: Vec<usize> = rand::seq::index::sample(rng, live.len(), p_eff)
        .into_iter()
        .map(|i| live[i])
        .collect();
    replaced.extend_from_slice(&chosen);

    let retained = centroids
        .points()
        .filter(|(j, _)| !chosen.contains(j))
        .map(|(_, c)| c);
    let mut sampler = CenterSampler::new(sample, retained);
    let mut out = centroids.clone();
    for &j in &replaced {
        let i = sampler.draw(params.candidates, rng)?;
        out.set(j, Slot::Point(sample.row(i).to_vec()));
    }
    Ok(ShakeReport { centroids: out, replaced })
}

/// Draws fresh samples until `attempt` succeeds or the retry budget runs out.
fn with_fresh_sample<T, R: Rng + ?Sized>(
    data: &DataMatrix,
    sample_size: usize,
    rng: &mut R,
    mut attempt: impl FnMut(&DataMatrix, &mut R) -> Result<T>,
) -> Result<(DataMatrix, T)> {
    for _ in 0..MAX_SAMPLE_RETRIES {
        let idx = draw_sample(data.rows(), sample_size, rng)?;
        let sample = data.select(&idx);
        match attempt(&sample, rng) {
            Ok(v) => return Ok((sample, v)),
            Err(Error::DegenerateSample { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ClusteringFailure(format!(
        "{MAX_SAMPLE_RETRIES} consecutive samples of size {sample_size} had too few distinct points"
    )))
}

/// Re-seeds any degenerate slot with greedy K-means++ on `pool`.
fn repair_degenerate<R: Rng + ?Sized>(
    centroids: &mut CentroidSet,
    pool: &DataMatrix,
    params: &LloydParams,
    rng: &mut R,
) -> Result<()> {
    let holes = centroids.degenerate_indices();
    if holes.is_empty() {
        return Ok(());
    }
    let mut sampler = CenterSampler::new(pool, centroids.points().map(|(_, c)| c));
    for j in holes {
        let i = sampler.draw(params.candidates, rng)?;
        centroids.set(j, Slot::Point(pool.row(i).to_vec()));
    }
    Ok(())
}

/// Runs the sampled VNS clustering loop on `data`.
pub fn big_vns_clust(data: &DataMatrix, params: &BigVnsParams) -> Result<ClusteringResult> {
    params.validate(data.rows())?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut incumbent = CentroidSet::degenerate(params.k);
    let mut best = f64::INFINITY;
    let mut p = if params.baseline_mode { 0 } else { 1 };
    let mut trace = Vec::new();

    loop {
        let iteration_start = Instant::now();
        let degenerate_before = incumbent.degenerate_count();
        let (sample, shaken) = with_fresh_sample(data, params.sample_size, &mut rng, |s, r| {
            shake_centroids_traced(&incumbent, p, s, &params.lloyd, r)
        })?;
        let local = lloyd(&sample, &shaken.centroids, &params.lloyd)?;
        let f_new = local.objective.value();
        let accepted = f_new < best;
        if accepted {
            incumbent = local.centroids;
            best = f_new;
        }
        trace.push(IterationRecord {
            p,
            degenerate_before,
            replaced: shaken.replaced.len(),
            sample_objective: f_new,
            accepted,
            best_sample_objective: best,
            lloyd_iterations: local.iterations,
            duration: iteration_start.elapsed(),
        });
        if !params.baseline_mode {
            p = if p >= params.p_max { 1 } else { p + 1 };
        }
        if start.elapsed() > params.time_limit
            || params.max_iterations.is_some_and(|n| trace.len() >= n)
        {
            break;
        }
    }

    if incumbent.degenerate_count() > 0 {
        with_fresh_sample(data, params.sample_size, &mut rng, |s, r| {
            let mut repaired = incumbent.clone();
            repair_degenerate(&mut repaired, s, &params.lloyd, r)?;
            incumbent = repaired;
            Ok(())
        })?;
    }

    let (labels, objective) = assign_points(data, &incumbent)?;
    Ok(ClusteringResult {
        centroids: incumbent,
        labels,
        objective,
        iterations: trace.len(),
        elapsed: start.elapsed(),
        trace,
    })
}

/// Greedy K-means++ seeding on the full dataset followed by Lloyd on the full dataset.
pub fn kmeans_full<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    params: &LloydParams,
    rng: &mut R,
) -> Result<ClusteringResult> {
    let start = Instant::now();
    if k == 0 || k > data.rows() {
        return Err(Error::usage(format!("k={k} must lie in 1..={}", data.rows())));
    }
    let init = kmeanspp_seed(data, k, params, rng)?;
    let mut result = kmeans_full_from(data, &init, params, rng)?;
    result.elapsed = start.elapsed();
    Ok(result)
}

/// Lloyd on the full dataset from caller-supplied centroids.
///
/// Slots left empty at convergence are re-seeded by K-means++ on the full data so the
/// result always carries `k` centers.
pub fn kmeans_full_from<R: Rng + ?Sized>(
    data: &DataMatrix,
    init: &CentroidSet,
    params: &LloydParams,
    rng: &mut R,
) -> Result<ClusteringResult> {
    let start = Instant::now();
    let out = lloyd(data, init, params)?;
    let mut centroids = out.centroids;
    repair_degenerate(&mut centroids, data, params, rng)?;
    let (labels, objective) = assign_points(data, &centroids)?;
    Ok(ClusteringResult {
        centroids,
        labels,
        objective,
        iterations: out.iterations,
        elapsed: start.elapsed(),
        trace: Vec::new(),
    })
}
