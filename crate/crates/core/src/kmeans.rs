//! Greedy K-means++ seeding and Lloyd's local search.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{assign_points, sq_dist, update_centroids, CentroidSet, DataMatrix, ObjectiveValue, Slot};

/// Stopping rules for Lloyd and the K-means++ candidate pool size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydParams {
    /// Hard cap on assign/update rounds.
    pub max_iters: usize,
    /// Stop once `(f_prev - f_cur) / f_prev` falls below this.
    pub rel_tol: f64,
    /// Points drawn per new center; the one giving the lowest objective wins.
    pub candidates: usize,
}

impl Default for LloydParams {
    fn default() -> Self {
        Self {
            max_iters: 300,
            rel_tol: 1e-4,
            candidates: 3,
        }
    }
}

impl LloydParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::usage("max_iters must be at least 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::usage("rel_tol must be nonnegative"));
        }
        if self.candidates == 0 {
            return Err(Error::usage("candidates must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    /// Final centroids; slots that lost all points stay Degenerate.
    pub centroids: CentroidSet,
    pub objective: ObjectiveValue,
    /// Number of update rounds performed.
    pub iterations: usize,
    /// False only when the iteration cap was hit.
    pub converged: bool,
    /// Objective after the initial assignment, then after every round.
    pub trajectory: Vec<f64>,
}

/// Incremental K-means++ sampler over a fixed sample.
///
/// Holds `d(x, U)²` for every sample point, where `U` is the set of centers fixed so
/// far. Each [`CenterSampler::draw`] adds the chosen point to `U`.
pub(crate) struct CenterSampler<'a> {
    sample: &'a DataMatrix,
    dists: Vec<f64>,
    has_centers: bool,
}

impl<'a> CenterSampler<'a> {
    pub(crate) fn new<'c>(sample: &'a DataMatrix, fixed: impl IntoIterator<Item = &'c [f64]>) -> Self {
        let mut sampler = Self {
            sample,
            dists: vec![f64::INFINITY; sample.rows()],
            has_centers: false,
        };
        for center in fixed {
            sampler.add_center(center);
        }
        sampler
    }

    fn add_center(&mut self, center: &[f64]) {
        for (d, x) in self.dists.iter_mut().zip(self.sample.iter_rows()) {
            let dc = sq_dist(x, center);
            if dc < *d {
                *d = dc;
            }
        }
        self.has_centers = true;
    }

    /// Cost of the sample once `candidate` joins the fixed centers.
    fn cost_with(&self, candidate: &[f64]) -> f64 {
        self.dists
            .iter()
            .zip(self.sample.iter_rows())
            .map(|(&d, x)| d.min(sq_dist(x, candidate)))
            .sum()
    }

    /// Draws the next center and returns its row index in the sample.
    pub(crate) fn draw<R: Rng + ?Sized>(&mut self, candidates: usize, rng: &mut R) -> Result<usize> {
        let s = self.sample.rows();
        let picks: Vec<usize> = if self.has_centers {
            let mut prefix = Vec::with_capacity(s);
            let mut total = 0.0;
            for &d in &self.dists {
                total += d;
                prefix.push(total);
            }
            if !(total > 0.0) {
                return Err(Error::DegenerateSample { sample_size: s });
            }
            let last_positive = self.dists.iter().rposition(|&d| d > 0.0).unwrap_or(s - 1);
            (0..candidates.max(1))
                .map(|_| {
                    let r = rng.random::<f64>() * total;
                    prefix.partition_point(|&c| c <= r).min(last_positive)
                })
                .collect()
        } else {
            (0..candidates.max(1)).map(|_| rng.random_range(0..s)).collect()
        };

        let mut best = (picks[0], f64::INFINITY);
        for &i in &picks {
            let cost = self.cost_with(self.sample.row(i));
            if cost < best.1 {
                best = (i, cost);
            }
        }
        self.add_center(self.sample.row(best.0));
        Ok(best.0)
    }
}

/// Draws one new center from `sample` by greedy K-means++ relative to `fixed`.
///
/// Candidates are drawn with probability proportional to `d(x, U)²` (uniformly when
/// `fixed` is empty); the candidate minimizing the sample objective of `U ∪ {x}` wins.
pub fn kmeanspp_next_center<R: Rng + ?Sized>(
    sample: &DataMatrix,
    fixed: &[&[f64]],
    params: &LloydParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate()?;
    if let Some(bad) = fixed.iter().find(|c| c.len() != sample.cols()) {
        return Err(Error::usage(format!(
            "fixed center has dimension {}, sample has {}",
            bad.len(),
            sample.cols()
        )));
    }
    let mut sampler = CenterSampler::new(sample, fixed.iter().copied());
    let i = sampler.draw(params.candidates, rng)?;
    Ok(sample.row(i).to_vec())
}

/// Full greedy K-means++ seeding of `k` centers on `sample`.
pub fn kmeanspp_seed<R: Rng + ?Sized>(
    sample: &DataMatrix,
    k: usize,
    params: &LloydParams,
    rng: &mut R,
) -> Result<CentroidSet> {
    params.validate()?;
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    if k > sample.rows() {
        return Err(Error::Seeding {
            k,
            found: sample.rows(),
        });
    }
    let mut sampler = CenterSampler::new(sample, std::iter::empty());
    let mut slots = Vec::with_capacity(k);
    for found in 0..k {
        match sampler.draw(params.candidates, rng) {
            Ok(i) => slots.push(Slot::Point(sample.row(i).to_vec())),
            Err(Error::DegenerateSample { .. }) => return Err(Error::Seeding { k, found }),
            Err(e) => return Err(e),
        }
    }
    Ok(CentroidSet::from_slots(slots))
}

/// Lloyd's algorithm from `init`.
///
/// Alternates assignment and mean updates until the relative improvement drops below
/// `rel_tol`, the objective reaches zero, or `max_iters` rounds have run. Slots that
/// lose all their points are left Degenerate.
pub fn lloyd(sample: &DataMatrix, init: &CentroidSet, params: &LloydParams) -> Result<LloydOutcome> {
    params.validate()?;
    let k = init.len();
    let (mut labels, f0) = assign_points(sample, init)?;
    let mut centroids = init.clone();
    let mut f_prev = f0.value();
    let mut trajectory = vec![f_prev];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iters {
        let next = update_centroids(sample, &labels, k)?;
        let (next_labels, f) = assign_points(sample, &next)?;
        iterations += 1;
        let f_cur = f.value();
        trajectory.push(f_cur);
        centroids = next;
        labels = next_labels;
        let stop = f_prev == 0.0 || (f_prev - f_cur) / f_prev < params.rel_tol;
        f_prev = f_cur;
        if stop {
            converged = true;
            break;
        }
    }

    Ok(LloydOutcome {
        centroids,
        objective: ObjectiveValue::from_sum(f_prev),
        iterations,
        converged,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::objective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn one_candidate() -> LloydParams {
        LloydParams {
            candidates: 1,
            ..LloydParams::default()
        }
    }

    #[test]
    fn only_positive_mass_point_is_drawn() {
        let s = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let a = [0.0, 0.0];
        for seed in 0..50 {
            let c = kmeanspp_next_center(&s, &[&a], &one_candidate(), &mut rng(seed)).unwrap();
            assert_eq!(c, vec![1.0, 1.0]);
        }
    }

    #[test]
    fn zero_mass_sample_is_an_error() {
        let s = DataMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let u = [1.0, 1.0];
        assert!(matches!(
            kmeanspp_next_center(&s, &[&u], &one_candidate(), &mut rng(0)),
            Err(Error::DegenerateSample { sample_size: 2 })
        ));
    }

    #[test]
    fn symmetric_points_are_equally_likely() {
        let s = DataMatrix::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let u = [0.0, 0.0];
        let mut r = rng(9);
        let draws = 100_000;
        let right = (0..draws)
            .filter(|_| kmeanspp_next_center(&s, &[&u], &one_candidate(), &mut r).unwrap()[0] > 0.0)
            .count();
        let freq = right as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn better_candidate_wins() {
        // U = {u}; costs of U ∪ {x} over S by hand: b -> 5, c -> 2, e -> 5.
        // D² weights 9, 10, 13 (total 32), so c is among two draws w.p. 1 - (22/32)².
        let s = DataMatrix::from_rows(&[[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [3.0, 2.0]]).unwrap();
        let u = [0.0, 0.0];
        let mut sampler = CenterSampler::new(&s, [&u[..]]);
        assert_eq!(sampler.cost_with(s.row(1)), 5.0);
        assert_eq!(sampler.cost_with(s.row(2)), 2.0);
        assert_eq!(sampler.cost_with(s.row(3)), 5.0);
        sampler.has_centers = true;

        let params = LloydParams {
            candidates: 2,
            ..LloydParams::default()
        };
        let mut r = rng(21);
        let draws = 40_000;
        let hits = (0..draws)
            .filter(|_| kmeanspp_next_center(&s, &[&u], &params, &mut r).unwrap() == vec![3.0, 1.0])
            .count();
        let expected = 1.0 - (22.0f64 / 32.0).powi(2);
        let freq = hits as f64 / draws as f64;
        assert!((freq - expected).abs() < 0.015, "{freq} vs {expected}");
    }

    #[test]
    fn seeding_full_sample_uses_every_point() {
        let rows = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0], [2.0, 3.0]];
        let s = DataMatrix::from_rows(&rows).unwrap();
        let c = kmeanspp_seed(&s, 5, &LloydParams::default(), &mut rng(4)).unwrap();
        let mut pts = c.to_points().unwrap();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, want);
    }

    #[test]
    fn seeding_needs_distinct_points() {
        let s = DataMatrix::from_rows(&[[1.0], [1.0], [2.0]]).unwrap();
        assert!(matches!(
            kmeanspp_seed(&s, 3, &LloydParams::default(), &mut rng(0)),
            Err(Error::Seeding { k: 3, found: 2 })
        ));
        assert!(kmeanspp_seed(&s, 2, &LloydParams::default(), &mut rng(0)).is_ok());
    }

    #[test]
    fn optimal_init_is_a_fixed_point() {
        let s = DataMatrix::from_rows(&[[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]]).unwrap();
        let init = CentroidSet::from_points([vec![0.0, 1.0], vec![10.0, 1.0]]);
        let out = lloyd(&s, &init, &LloydParams::default()).unwrap();
        assert_eq!(out.objective.value(), 4.0);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.centroids, init);
    }

    #[test]
    fn lloyd_respects_iteration_cap() {
        let mut r = rng(2);
        let rows: Vec<[f64; 2]> = (0..200).map(|_| [r.random(), r.random()]).collect();
        let s = DataMatrix::from_rows(&rows).unwrap();
        let init = CentroidSet::from_points([vec![0.0, 0.0], vec![0.01, 0.0], vec![0.02, 0.0]]);
        let params = LloydParams {
            max_iters: 2,
            rel_tol: 0.0,
            candidates: 1,
        };
        let out = lloyd(&s, &init, &params).unwrap();
        assert_eq!(out.iterations, 2);
        assert!(!out.converged);
        assert_eq!(out.trajectory.len(), 3);
        assert_eq!(out.objective, objective(&s, &out.centroids).unwrap());
    }

    #[test]
    fn lloyd_leaves_empty_slots_degenerate() {
        let s = DataMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let init = CentroidSet::from_points([vec![0.5], vec![100.0]]);
        let out = lloyd(&s, &init, &LloydParams::default()).unwrap();
        assert!(out.centroids.slot(1).is_degenerate());
        assert_eq!(out.centroids.point(0).unwrap(), &[0.5]);
    }

    #[test]
    fn invalid_params_rejected() {
        let s = DataMatrix::from_rows(&[[0.0]]).unwrap();
        let init = CentroidSet::from_points([vec![0.0]]);
        let bad = LloydParams {
            max_iters: 0,
            ..LloydParams::default()
        };
        assert!(lloyd(&s, &init, &bad).is_err());
        assert!(lloyd(&s, &CentroidSet::degenerate(2), &LloydParams::default()).is_err());
    }
}
