//! Dataset and solution representations for minimum sum-of-squares clustering.
//!
//! The objective of a centroid set `C` over a dataset `X` is
//!
//! ```text
//! f(C, X) = Σ_i min_j ‖x_i − c_j‖²
//! ```
//!
//! Every routine here is a pure function over immutable inputs. Scans over points
//! run sequentially in row order, so sums are bit-reproducible.

use rand::Rng;

use crate::error::{Error, Result};

/// `m` points by `n` features, stored row-major. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    m: usize,
    n: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::usage(format!(
                "data matrix needs at least one point and one feature (got {m}x{n})"
            )));
        }
        if values.len() != m * n {
            return Err(Error::usage(format!(
                "expected {} values for a {m}x{n} matrix, got {}",
                m * n,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!(
                "non-finite value at row {}, column {}",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { m, n, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::usage(format!(
                    "row {i} has {} features, expected {n}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n, values)
    }

    /// Number of points.
    #[inline]
    pub fn rows(&self) -> usize {
        self.m
    }

    /// Number of features.
    #[inline]
    pub fn cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Materializes the rows named by `sample`, in index order.
    pub fn select(&self, sample: &SampleIndexSet) -> DataMatrix {
        let mut values = Vec::with_capacity(sample.len() * self.n);
        for &i in sample.indices() {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            m: sample.len(),
            n: self.n,
            values,
        }
    }

    /// Coordinate-wise mean of all points.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for row in self.iter_rows() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= self.m as f64);
        acc
    }
}

/// One centroid slot: a point in R^n or an empty (degenerate) cluster.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Point(Vec<f64>),
    Degenerate,
}

impl Slot {
    pub fn as_point(&self) -> Option<&[f64]> {
        match self {
            Slot::Point(p) => Some(p),
            Slot::Degenerate => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Slot::Degenerate)
    }
}

/// A candidate solution: exactly `k` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSet {
    slots: Vec<Slot>,
}

impl CentroidSet {
    /// `k` empty slots, the state a sampling run starts from.
    pub fn degenerate(k: usize) -> Self {
        Self {
            slots: vec![Slot::Degenerate; k],
        }
    }

    pub fn from_points<P: Into<Vec<f64>>>(points: impl IntoIterator<Item = P>) -> Self {
        Self {
            slots: points.into_iter().map(|p| Slot::Point(p.into())).collect(),
        }
    }

    pub fn from_slots(slots: Vec<Slot>) -> Self {
        Self { slots }
    }

    /// Number of slots, `k`.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, j: usize) -> &Slot {
        &self.slots[j]
    }

    pub fn set(&mut self, j: usize, slot: Slot) {
        self.slots[j] = slot;
    }

    pub fn point(&self, j: usize) -> Option<&[f64]> {
        self.slots[j].as_point()
    }

    pub fn degenerate_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_degenerate()).count()
    }

    pub fn degenerate_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.slots[j].is_degenerate()).collect()
    }

    /// Iterates `(slot index, coordinates)` over non-degenerate slots.
    pub fn points(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(j, s)| s.as_point().map(|p| (j, p)))
    }

    /// All coordinates, or `None` if any slot is degenerate.
    pub fn to_points(&self) -> Option<Vec<Vec<f64>>> {
        self.slots
            .iter()
            .map(|s| s.as_point().map(<[f64]>::to_vec))
            .collect()
    }

    fn check_usable(&self, n: usize) -> Result<()> {
        let mut any = false;
        for (j, p) in self.points() {
            any = true;
            if p.len() != n {
                return Err(Error::usage(format!(
                    "centroid {j} has dimension {}, data has {n}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::usage(format!("centroid {j} has non-finite coordinates")));
            }
        }
        if !any {
            return Err(Error::InvalidSolution { k: self.len() });
        }
        Ok(())
    }
}

/// Per-point cluster labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    labels: Vec<usize>,
}

impl Assignment {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }
}

/// Sum of squared distances; always finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ObjectiveValue(f64);

impl ObjectiveValue {
    pub(crate) fn from_sum(v: f64) -> Self {
        debug_assert!(v >= 0.0 && v.is_finite());
        Self(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for ObjectiveValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Distinct row indices of a uniform random subset, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleIndexSet {
    indices: Vec<usize>,
}

impl SampleIndexSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared Euclidean distance `Σ_d (a_d − b_d)²`.
pub fn squared_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::usage(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(sq_dist(a, b))
}

/// Nearest non-degenerate slot for `x`; ties go to the lowest slot index.
#[inline]
pub(crate) fn nearest(x: &[f64], centroids: &CentroidSet) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (j, c) in centroids.points() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Labels each point with its nearest centroid and returns the objective.
pub fn assign_points(data: &DataMatrix, centroids: &CentroidSet) -> Result<(Assignment, ObjectiveValue)> {
    centroids.check_usable(data.cols())?;
    let mut labels = Vec::with_capacity(data.rows());
    let mut total = 0.0;
    for x in data.iter_rows() {
        let (j, d) = nearest(x, centroids);
        labels.push(j);
        total += d;
    }
    Ok((Assignment { labels }, ObjectiveValue(total)))
}

/// Same value as [`assign_points`] without materializing the labels.
pub fn objective(data: &DataMatrix, centroids: &CentroidSet) -> Result<ObjectiveValue> {
    centroids.check_usable(data.cols())?;
    let total = data.iter_rows().map(|x| nearest(x, centroids).1).sum();
    Ok(ObjectiveValue(total))
}

/// Moves every slot to the mean of its points. Slots with no points become Degenerate.
pub fn update_centroids(data: &DataMatrix, assignment: &Assignment, k: usize) -> Result<CentroidSet> {
    if assignment.len() != data.rows() {
        return Err(Error::usage(format!(
            "assignment covers {} points, data has {}",
            assignment.len(),
            data.rows()
        )));
    }
    let n = data.cols();
    let mut sums = vec![0.0; k * n];
    let mut counts = vec![0usize; k];
    for (x, &j) in data.iter_rows().zip(assignment.labels()) {
        if j >= k {
            return Err(Error::usage(format!("label {j} out of range for k={k}")));
        }
        counts[j] += 1;
        for (s, v) in sums[j * n..(j + 1) * n].iter_mut().zip(x) {
            *s += v;
        }
    }
    let slots = counts
        .iter()
        .zip(sums.chunks_exact(n))
        .map(|(&count, sum)| {
            if count == 0 {
                Slot::Degenerate
            } else {
                Slot::Point(sum.iter().map(|s| s / count as f64).collect())
            }
        })
        .collect();
    Ok(CentroidSet { slots })
}

/// Draws `s` distinct indices from `0..m`, uniformly over all size-`s` subsets.
pub fn draw_sample<R: Rng + ?Sized>(m: usize, s: usize, rng: &mut R) -> Result<SampleIndexSet> {
    if s == 0 || s > m {
        return Err(Error::usage(format!("sample size {s} must lie in 1..={m}")));
    }
    let mut indices = rand::seq::index::sample(rng, m, s).into_vec();
    indices.sort_unstable();
    Ok(SampleIndexSet { indices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(rows: &[[f64; 2]]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn squared_distance_basics() {
        assert_eq!(squared_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(squared_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            squared_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn squared_distance_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a: Vec<f64> = (0..8).map(|_| rng.random_range(-5.0..5.0)).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut naive = 0.0;
            for d in 0..8 {
                let diff = a[d] - b[d];
                naive += diff * diff;
            }
            assert_eq!(squared_distance(&a, &b).unwrap(), naive);
            assert_eq!(squared_distance(&b, &a).unwrap(), naive);
        }
    }

    #[test]
    fn forced_assignment() {
        let x = pts(&[[0.0, 0.0], [2.0, 0.0]]);
        let c = CentroidSet::from_points([vec![1.0, 0.0]]);
        let (y, f) = assign_points(&x, &c).unwrap();
        assert_eq!(y.labels(), &[0, 0]);
        assert_eq!(f.value(), 2.0);
        assert_eq!(objective(&x, &c).unwrap().value(), 2.0);
    }

    #[test]
    fn ties_go_to_lowest_slot() {
        let x = pts(&[[1.0, 0.0]]);
        let c = CentroidSet::from_points([vec![0.0, 0.0], vec![2.0, 0.0]]);
        let (y, _) = assign_points(&x, &c).unwrap();
        assert_eq!(y.labels(), &[0]);
    }

    #[test]
    fn degenerate_slots_are_skipped() {
        let x = pts(&[[0.0, 0.0], [5.0, 5.0]]);
        let c = CentroidSet::from_slots(vec![Slot::Degenerate, Slot::Point(vec![4.0, 4.0])]);
        let (y, f) = assign_points(&x, &c).unwrap();
        assert_eq!(y.labels(), &[1, 1]);
        assert_eq!(f.value(), 32.0 + 2.0);

        let all_empty = CentroidSet::degenerate(3);
        assert!(matches!(
            assign_points(&x, &all_empty),
            Err(Error::InvalidSolution { k: 3 })
        ));
        assert!(objective(&x, &all_empty).is_err());
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let x = pts(&[[0.0, 0.0]]);
        let c = CentroidSet::from_points([vec![0.0, 0.0, 0.0]]);
        assert!(matches!(objective(&x, &c), Err(Error::Usage(_))));
    }

    #[test]
    fn single_point_on_its_centroid() {
        let x = pts(&[[1.5, -2.0]]);
        let c = CentroidSet::from_points([vec![1.5, -2.0]]);
        assert_eq!(objective(&x, &c).unwrap().value(), 0.0);
    }

    #[test]
    fn update_means_and_empty_slots() {
        let x = pts(&[[0.0, 0.0], [2.0, 0.0]]);
        let y = Assignment::new(vec![0, 0]);
        let c = update_centroids(&x, &y, 1).unwrap();
        assert_eq!(c.point(0).unwrap(), &[1.0, 0.0]);

        let c = update_centroids(&x, &y, 2).unwrap();
        assert!(c.slot(1).is_degenerate());
        assert!(update_centroids(&x, &Assignment::new(vec![0, 2]), 2).is_err());
    }

    #[test]
    fn data_matrix_validation() {
        assert!(DataMatrix::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(DataMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(DataMatrix::new(0, 2, vec![]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        let x = pts(&[[0.0, 2.0], [2.0, 4.0]]);
        assert_eq!(x.mean(), vec![1.0, 3.0]);
    }

    #[test]
    fn exhaustive_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = draw_sample(5, 5, &mut rng).unwrap();
        assert_eq!(s.indices(), &[0, 1, 2, 3, 4]);
        assert!(draw_sample(5, 6, &mut rng).is_err());
        assert!(draw_sample(5, 0, &mut rng).is_err());
    }

    #[test]
    fn sample_is_deterministic_and_distinct() {
        let a = draw_sample(1000, 50, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = draw_sample(1000, 50, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.indices().to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), 50);
        assert!(sorted.iter().all(|&i| i < 1000));
    }

    #[test]
    fn single_index_sample_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 10];
        let draws = 100_000;
        for _ in 0..draws {
            counts[draw_sample(10, 1, &mut rng).unwrap().indices()[0]] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.1).abs() <= 0.01, "frequency {freq}");
        }
    }
}
