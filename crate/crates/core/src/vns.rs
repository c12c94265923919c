//! Problem-agnostic variable neighborhood search.
//!
//! Two neighborhood families drive the search. A [`ShakingStructure`] perturbs the
//! incumbent at a given power `p` by sampling from `𝒩_p(x)`. An
//! [`ImprovementStructure`] supplies the finite neighborhoods `N_1 … N_{l_max}` that
//! local search and variable neighborhood descent enumerate.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{Error, Result};

/// Deterministic objective to minimize.
pub trait Objective<S> {
    fn evaluate(&self, x: &S) -> f64;
}

impl<S, F: Fn(&S) -> f64> Objective<S> for F {
    fn evaluate(&self, x: &S) -> f64 {
        self(x)
    }
}

/// A solution with its cached objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored<S> {
    pub solution: S,
    pub value: f64,
}

impl<S> Scored<S> {
    pub fn new(objective: &impl Objective<S>, solution: S) -> Self {
        let value = objective.evaluate(&solution);
        Self { solution, value }
    }
}

/// Randomized samplers over the shaking neighborhoods `𝒩_1 … 𝒩_{k_max}`.
pub trait ShakingStructure<S> {
    fn k_max(&self) -> usize;

    /// Draws a member of `𝒩_p(x)`; `None` when that neighborhood is empty.
    fn sample<R: Rng + ?Sized>(&self, x: &S, p: usize, rng: &mut R) -> Option<S>;
}

/// Shaking over explicitly enumerated neighborhoods with a uniform distribution.
pub struct UniformShaking<F> {
    k_max: usize,
    neighborhood: F,
}

impl<F> UniformShaking<F> {
    pub fn new(k_max: usize, neighborhood: F) -> Self {
        Self { k_max, neighborhood }
    }
}

impl<S, F: Fn(&S, usize) -> Vec<S>> ShakingStructure<S> for UniformShaking<F> {
    fn k_max(&self) -> usize {
        self.k_max
    }

    fn sample<R: Rng + ?Sized>(&self, x: &S, p: usize, rng: &mut R) -> Option<S> {
        let mut members = (self.neighborhood)(x, p);
        if members.is_empty() {
            return None;
        }
        let i = rng.random_range(0..members.len());
        Some(members.swap_remove(i))
    }
}

/// Shaking over enumerated neighborhoods, drawing members proportionally to a weight.
pub struct WeightedShaking<F, W> {
    k_max: usize,
    neighborhood: F,
    weight: W,
}

impl<F, W> WeightedShaking<F, W> {
    pub fn new(k_max: usize, neighborhood: F, weight: W) -> Self {
        Self {
            k_max,
            neighborhood,
            weight,
        }
    }
}

impl<S, F, W> ShakingStructure<S> for WeightedShaking<F, W>
where
    F: Fn(&S, usize) -> Vec<S>,
    W: Fn(&S, &S) -> f64,
{
    fn k_max(&self) -> usize {
        self.k_max
    }

    fn sample<R: Rng + ?Sized>(&self, x: &S, p: usize, rng: &mut R) -> Option<S> {
        let mut members = (self.neighborhood)(x, p);
        let weights: Vec<f64> = members.iter().map(|y| (self.weight)(x, y).max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        if members.is_empty() || !(total > 0.0) {
            return None;
        }
        let mut r = rng.random::<f64>() * total;
        let mut chosen = weights.iter().rposition(|&w| w > 0.0)?;
        for (i, w) in weights.iter().enumerate() {
            if r < *w {
                chosen = i;
                break;
            }
            r -= w;
        }
        Some(members.swap_remove(chosen))
    }
}

/// Finite, enumerable neighborhoods `N_1 … N_{l_max}` for the improvement phase.
pub trait ImprovementStructure<S> {
    fn l_max(&self) -> usize;

    /// Members of `N_l(x)`, `1 ≤ l ≤ l_max`, in a fixed enumeration order.
    fn neighbors(&self, x: &S, l: usize) -> Vec<S>;
}

/// Improvement structure built from a closure `(x, l) -> N_l(x)`.
pub struct Neighborhoods<F> {
    l_max: usize,
    f: F,
}

impl<F> Neighborhoods<F> {
    pub fn new(l_max: usize, f: F) -> Self {
        Self { l_max, f }
    }
}

impl<S, F: Fn(&S, usize) -> Vec<S>> ImprovementStructure<S> for Neighborhoods<F> {
    fn l_max(&self) -> usize {
        self.l_max
    }

    fn neighbors(&self, x: &S, l: usize) -> Vec<S> {
        (self.f)(x, l)
    }
}

/// Picks a member of `𝒩_p(x)` at random.
pub fn shake<S, N, R>(x: &S, p: usize, structure: &N, rng: &mut R) -> Result<S>
where
    N: ShakingStructure<S>,
    R: Rng + ?Sized,
{
    if p == 0 || p > structure.k_max() {
        return Err(Error::usage(format!(
            "shaking index {p} outside 1..={}",
            structure.k_max()
        )));
    }
    structure.sample(x, p, rng).ok_or(Error::Shaking { index: p })
}

/// How the search moves between neighborhoods after evaluating a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodChange {
    /// Move and restart at neighborhood 1 on strict improvement, else advance.
    Sequential,
    /// Move on strict improvement; always advance.
    Cyclic,
}

impl NeighborhoodChange {
    pub fn apply<S>(self, x: Scored<S>, candidate: Scored<S>, p: usize) -> (Scored<S>, usize) {
        match self {
            NeighborhoodChange::Sequential => neighborhood_change_sequential(x, candidate, p),
            NeighborhoodChange::Cyclic => neighborhood_change_cyclic(x, candidate, p),
        }
    }
}

pub fn neighborhood_change_sequential<S>(x: Scored<S>, candidate: Scored<S>, p: usize) -> (Scored<S>, usize) {
    if candidate.value < x.value {
        (candidate, 1)
    } else {
        (x, p + 1)
    }
}

pub fn neighborhood_change_cyclic<S>(x: Scored<S>, candidate: Scored<S>, p: usize) -> (Scored<S>, usize) {
    if candidate.value < x.value {
        (candidate, p + 1)
    } else {
        (x, p + 1)
    }
}

/// First minimizer of the objective over `members` (enumeration order breaks ties).
fn best_of<S>(objective: &impl Objective<S>, members: Vec<S>) -> Option<Scored<S>> {
    let mut best: Option<Scored<S>> = None;
    for y in members {
        let v = objective.evaluate(&y);
        if best.as_ref().is_none_or(|b| v < b.value) {
            best = Some(Scored { solution: y, value: v });
        }
    }
    best
}

/// Steepest descent: jump to the best neighbor while it strictly improves.
pub fn best_improvement_local_search<S, F>(objective: &impl Objective<S>, x: Scored<S>, neighbors: F) -> Scored<S>
where
    F: Fn(&S) -> Vec<S>,
{
    let mut x = x;
    while let Some(best) = best_of(objective, neighbors(&x.solution)) {
        if best.value < x.value {
            x = best;
        } else {
            break;
        }
    }
    x
}

/// Sequential variable neighborhood descent with best improvement.
///
/// Sweeps `N_1 … N_{l_max}` under `policy` and stops after a full sweep that does not
/// improve the incumbent, so the result is a local optimum in every neighborhood.
pub fn b_vnd<S, N>(objective: &impl Objective<S>, x: Scored<S>, structure: &N, policy: NeighborhoodChange) -> Scored<S>
where
    S: Clone,
    N: ImprovementStructure<S>,
{
    let l_max = structure.l_max();
    let mut x = x;
    loop {
        let start = x.value;
        let mut l = 1;
        while l <= l_max {
            match best_of(objective, structure.neighbors(&x.solution, l)) {
                Some(candidate) => (x, l) = policy.apply(x, candidate, l),
                None => l += 1,
            }
        }
        if !(x.value < start) {
            return x;
        }
    }
}

/// Stopping rule for [`basic_vns`]: whichever limit is hit first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VnsBudget {
    pub time_limit: Duration,
    pub max_iterations: Option<usize>,
}

impl VnsBudget {
    pub fn time(limit: Duration) -> Self {
        Self {
            time_limit: limit,
            max_iterations: None,
        }
    }

    pub fn iterations(n: usize) -> Self {
        Self {
            time_limit: Duration::MAX,
            max_iterations: Some(n),
        }
    }
}

/// Observable search state: the incumbent and the current neighborhood index.
#[derive(Debug, Clone, PartialEq)]
pub struct VnsState<S> {
    pub incumbent: Scored<S>,
    pub neighborhood_index: usize,
}

#[derive(Debug, Clone)]
pub struct VnsOutcome<S> {
    pub best: Scored<S>,
    pub iterations: usize,
    /// Incumbent value after every shake/improve/change step.
    pub trace: Vec<f64>,
    pub elapsed: Duration,
}

/// Basic VNS: shake at power `p`, improve, change neighborhood; `p` wraps to 1 past
/// `k_max`. The budget is checked after each step, so the run overshoots the time
/// limit by at most one step.
pub fn basic_vns<S, N, L, R>(
    objective: &impl Objective<S>,
    initial: Scored<S>,
    shaking: &N,
    mut local_search: L,
    policy: NeighborhoodChange,
    budget: VnsBudget,
    rng: &mut R,
) -> Result<VnsOutcome<S>>
where
    N: ShakingStructure<S>,
    L: FnMut(Scored<S>) -> Scored<S>,
    R: Rng + ?Sized,
{
    let k_max = shaking.k_max();
    if k_max == 0 {
        return Err(Error::usage("k_max must be at least 1"));
    }
    if budget.time_limit.is_zero() || budget.max_iterations == Some(0) {
        return Err(Error::usage("VNS budget must be positive"));
    }
    let start = Instant::now();
    let mut state = VnsState {
        incumbent: initial,
        neighborhood_index: 1,
    };
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let shaken = shake(&state.incumbent.solution, state.neighborhood_index, shaking, rng)?;
        let improved = local_search(Scored::new(objective, shaken));
        let (incumbent, p) = policy.apply(state.incumbent, improved, state.neighborhood_index);
        state = VnsState {
            incumbent,
            neighborhood_index: if p > k_max { 1 } else { p },
        };
        iterations += 1;
        trace.push(state.incumbent.value);
        if start.elapsed() > budget.time_limit || budget.max_iterations.is_some_and(|n| iterations >= n) {
            break;
        }
    }
    Ok(VnsOutcome {
        best: state.incumbent,
        iterations,
        trace,
        elapsed: start.elapsed(),
    })
}

/// A small rugged landscape on a square integer grid, used to exercise the kernel.
pub mod toy {
    use rand::Rng;

    use super::{ImprovementStructure, Objective, ShakingStructure};

    /// `0.05·‖x − target‖² + 5·(ridge(i) + ridge(j))` on `0..size` squared, where
    /// `ridge(v)` is the distance from `v` to the nearest multiple of `period`. Local
    /// search gets trapped on the lattice of multiples.
    #[derive(Debug, Clone)]
    pub struct RuggedGrid {
        pub size: i64,
        pub target: (i64, i64),
        pub period: i64,
        /// Chebyshev radius of `𝒩_1`; `𝒩_p` has radius `p·radius`.
        pub shake_radius: i64,
        pub k_max: usize,
    }

    impl Default for RuggedGrid {
        fn default() -> Self {
            Self {
                size: 100,
                target: (71, 23),
                period: 8,
                shake_radius: 8,
                k_max: 4,
            }
        }
    }

    impl RuggedGrid {
        fn ridge(&self, v: i64) -> i64 {
            let r = v.rem_euclid(self.period);
            r.min(self.period - r)
        }

        pub fn contains(&self, x: &(i64, i64)) -> bool {
            (0..self.size).contains(&x.0) && (0..self.size).contains(&x.1)
        }

        /// Every member of `𝒩_p(x)`: grid points within Chebyshev radius `p·shake_radius`, excluding `x`.
        pub fn shake_neighborhood(&self, x: &(i64, i64), p: usize) -> Vec<(i64, i64)> {
            let r = self.shake_radius * p as i64;
            let mut out = Vec::new();
            for i in (x.0 - r).max(0)..=(x.0 + r).min(self.size - 1) {
                for j in (x.1 - r).max(0)..=(x.1 + r).min(self.size - 1) {
                    if (i, j) != *x {
                        out.push((i, j));
                    }
                }
            }
            out
        }
    }

    impl Objective<(i64, i64)> for RuggedGrid {
        fn evaluate(&self, x: &(i64, i64)) -> f64 {
            let di = (x.0 - self.target.0) as f64;
            let dj = (x.1 - self.target.1) as f64;
            0.05 * (di * di + dj * dj) + 5.0 * (self.ridge(x.0) + self.ridge(x.1)) as f64
        }
    }

    impl ShakingStructure<(i64, i64)> for RuggedGrid {
        fn k_max(&self) -> usize {
            self.k_max
        }

        fn sample<R: Rng + ?Sized>(&self, x: &(i64, i64), p: usize, rng: &mut R) -> Option<(i64, i64)> {
            let r = self.shake_radius * p as i64;
            let (lo_i, hi_i) = ((x.0 - r).max(0), (x.0 + r).min(self.size - 1));
            let (lo_j, hi_j) = ((x.1 - r).max(0), (x.1 + r).min(self.size - 1));
            if lo_i == hi_i && lo_j == hi_j {
                return None;
            }
            loop {
                let y = (rng.random_range(lo_i..=hi_i), rng.random_range(lo_j..=hi_j));
                if y != *x {
                    return Some(y);
                }
            }
        }
    }

    /// `N_1`: the four axis moves; `N_2`: the four diagonal moves.
    impl ImprovementStructure<(i64, i64)> for RuggedGrid {
        fn l_max(&self) -> usize {
            2
        }

        fn neighbors(&self, x: &(i64, i64), l: usize) -> Vec<(i64, i64)> {
            let moves: &[(i64, i64)] = match l {
                1 => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
                2 => &[(-1, -1), (-1, 1), (1, -1), (1, 1)],
                _ => &[],
            };
            moves
                .iter()
                .map(|(a, b)| (x.0 + a, x.1 + b))
                .filter(|y| self.contains(y))
                .collect()
        }
    }
}
