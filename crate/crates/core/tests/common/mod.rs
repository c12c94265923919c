//! Independent reference implementations used as test oracles.
//!
//! These are written directly from the definitions with plain nested loops over
//! `Vec<Vec<f64>>` and `Option` slots, sharing no code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnsclust::{CentroidSet, DataMatrix, Slot};

pub type Centers = Vec<Option<Vec<f64>>>;

pub fn to_rows(x: &DataMatrix) -> Vec<Vec<f64>> {
    (0..x.rows()).map(|i| x.row(i).to_vec()).collect()
}

pub fn to_centers(c: &CentroidSet) -> Centers {
    c.slots()
        .iter()
        .map(|s| match s {
            Slot::Point(p) => Some(p.clone()),
            Slot::Degenerate => None,
        })
        .collect()
}

pub fn from_centers(c: &Centers) -> CentroidSet {
    CentroidSet::from_slots(
        c.iter()
            .map(|s| match s {
                Some(p) => Slot::Point(p.clone()),
                None => Slot::Degenerate,
            })
            .collect(),
    )
}

pub fn naive_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for d in 0..a.len() {
        let diff = a[d] - b[d];
        total += diff * diff;
    }
    total
}

/// Exhaustive nearest-center scan; strict `<` keeps the lowest index on ties.
pub fn naive_assign(x: &[Vec<f64>], c: &Centers) -> (Vec<usize>, f64) {
    let mut labels = Vec::new();
    let mut total = 0.0;
    for p in x {
        let mut best_j = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..c.len() {
            if let Some(cj) = &c[j] {
                let d = naive_sq(p, cj);
                if d < best_d {
                    best_d = d;
                    best_j = j;
                }
            }
        }
        labels.push(best_j);
        total += best_d;
    }
    (labels, total)
}

pub fn naive_update(x: &[Vec<f64>], labels: &[usize], k: usize) -> Centers {
    let n = x[0].len();
    let mut out = Vec::new();
    for j in 0..k {
        let mut sum = vec![0.0; n];
        let mut count = 0usize;
        for i in 0..x.len() {
            if labels[i] == j {
                count += 1;
                for d in 0..n {
                    sum[d] += x[i][d];
                }
            }
        }
        if count == 0 {
            out.push(None);
        } else {
            out.push(Some(sum.iter().map(|s| s / count as f64).collect()));
        }
    }
    out
}

/// Reference Lloyd loop: returns the objective after every step and the final centers.
pub fn naive_lloyd(x: &[Vec<f64>], init: &Centers, max_iters: usize, rel_tol: f64) -> (Vec<f64>, Centers, usize, bool) {
    let k = init.len();
    let mut centers = init.clone();
    let (mut labels, mut f_prev) = naive_assign(x, &centers);
    let mut traj = vec![f_prev];
    let mut it = 0;
    let mut converged = false;
    while it < max_iters {
        let next = naive_update(x, &labels, k);
        let (next_labels, f_cur) = naive_assign(x, &next);
        it += 1;
        traj.push(f_cur);
        centers = next;
        labels = next_labels;
        let stop = f_prev == 0.0 || (f_prev - f_cur) / f_prev < rel_tol;
        f_prev = f_cur;
        if stop {
            converged = true;
            break;
        }
    }
    (traj, centers, it, converged)
}

/// Random dataset with `m` points in `n` dimensions, mixed from a few loose blobs.
pub fn random_data(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DataMatrix {
    let blobs: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
    let mut values = Vec::with_capacity(m * n);
    for _ in 0..m {
        let b = &blobs[rng.random_range(0..blobs.len())];
        for d in 0..n {
            values.push(b[d] + rng.random_range(-3.0..3.0));
        }
    }
    DataMatrix::new(m, n, values).unwrap()
}

pub fn random_centers(rng: &mut ChaCha8Rng, k: usize, n: usize) -> CentroidSet {
    CentroidSet::from_points((0..k).map(|_| (0..n).map(|_| rng.random_range(-12.0..12.0)).collect::<Vec<f64>>()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
