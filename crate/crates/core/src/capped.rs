//! The capped cost `c̃(λ, C) = Σ_j min(1/(2k+1), (1−2k/n)·d_j/λ)` and the
//! incremental nearest-center bookkeeping it is evaluated on.
//!
//! Extended-real conventions (`0/0 = 0`, `∞/∞ = 0`, `x/0 = ∞` for `x > 0`)
//! live in [`capped_contribution`] only.

use crate::error::{Error, Result};
use crate::instance::{check_regular_range, Instance};
use crate::numeric::CompensatedSum;

/// The constants of the capped cost for a given `(k, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedParams {
    pub k: usize,
    pub n: usize,
    /// `1/(2k+1)`
    pub cap: f64,
    /// `1 − 2k/n`
    pub shrink: f64,
    /// `(2k+1)(1 − 2k/n)`; a customer at distance `d` hits the cap iff
    /// `λ ≤ scale·d`.
    pub scale: f64,
}

impl CappedParams {
    /// Requires `2 ≤ k ≤ n/3`.
    pub fn new(k: usize, n: usize) -> Result<Self> {
        check_regular_range(k, n)?;
        let (kf, nf) = (k as f64, n as f64);
        let shrink = 1.0 - 2.0 * kf / nf;
        Ok(CappedParams {
            k,
            n,
            cap: 1.0 / (2.0 * kf + 1.0),
            shrink,
            scale: (2.0 * kf + 1.0) * shrink,
        })
    }

    pub fn for_instance(instance: &Instance) -> Result<Self> {
        Self::new(instance.k(), instance.num_customers())
    }

    /// The λ at which a customer at distance `d` leaves the cap.
    #[inline]
    pub fn breakpoint(&self, d: f64) -> f64 {
        self.scale * d
    }

    /// `1 − 1/k`
    pub fn decay(&self) -> f64 {
        1.0 - 1.0 / self.k as f64
    }

    /// Right-hand side of the per-iteration invariant,
    /// `pᵗ·n/(2k+1) + (1−pᵗ)(1−2k/n)` with `p = 1 − 1/k`.
    pub fn invariant_bound(&self, t: usize) -> f64 {
        let pt = self.decay().powi(t as i32);
        pt * self.n as f64 * self.cap + (1.0 - pt) * self.shrink
    }
}

/// One customer's share `min(cap, shrink·d/λ)` of the capped cost.
#[inline]
pub fn capped_contribution(d: f64, lambda: f64, params: &CappedParams) -> f64 {
    if d == 0.0 || lambda == f64::INFINITY {
        return 0.0;
    }
    if lambda <= params.breakpoint(d) {
        return params.cap;
    }
    (params.shrink * d / lambda).min(params.cap)
}

/// Capped terms are counted and divided once: summing `2k+1` copies of
/// `1/(2k+1)` can land just below 1, and the stopping tests compare
/// against 1 exactly.
pub fn capped_cost_of(distances: &[f64], lambda: f64, params: &CappedParams) -> f64 {
    if lambda == f64::INFINITY {
        return 0.0;
    }
    let mut capped = 0usize;
    let mut linear = CompensatedSum::default();
    for &d in distances {
        if d == 0.0 {
            continue;
        }
        let v = capped_contribution(d, lambda, params);
        if v == params.cap {
            capped += 1;
        } else {
            linear.add(v);
        }
    }
    capped as f64 / (2 * params.k + 1) as f64 + linear.value()
}

/// A chosen center set together with every customer's distance to it.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentState {
    chosen: Vec<usize>,
    member: Vec<bool>,
    dist: Vec<f64>,
    uncovered: usize,
}

impl AssignmentState {
    /// `C = ∅`: every distance is infinite.
    pub fn new(instance: &Instance) -> Self {
        let n = instance.num_customers();
        AssignmentState {
            chosen: Vec::new(),
            member: vec![false; instance.num_centers()],
            dist: vec![f64::INFINITY; n],
            uncovered: n,
        }
    }

    pub fn from_centers(instance: &Instance, centers: &[usize]) -> Result<Self> {
        let mut state = Self::new(instance);
        for &i in centers {
            state.add_center(instance, i)?;
        }
        Ok(state)
    }

    /// Chosen centers in insertion order.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member.get(i).copied().unwrap_or(false)
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn uncovered_count(&self) -> usize {
        self.uncovered
    }

    /// `c(C)`; infinite while any customer is uncovered. Recomputed in
    /// `O(n)` rather than tracked: a running total drifts, and callers
    /// compare against λ = 0 exactly.
    pub fn true_cost(&self) -> f64 {
        if self.uncovered > 0 {
            return f64::INFINITY;
        }
        let mut total = CompensatedSum::default();
        for &d in &self.dist {
            total.add(d);
        }
        total.value()
    }

    /// Adds center `i` in `O(deg(i))`. Re-adding a chosen center is a no-op.
    pub fn add_center(&mut self, instance: &Instance, i: usize) -> Result<()> {
        if i >= self.member.len() {
            return Err(Error::BadIndex {
                what: "center",
                id: i,
                limit: self.member.len(),
            });
        }
        if self.member[i] {
            return Ok(());
        }
        self.member[i] = true;
        self.chosen.push(i);
        for (j, c) in instance.center_edges(i) {
            let old = self.dist[j];
            if c < old {
                if old == f64::INFINITY {
                    self.uncovered -= 1;
                }
                self.dist[j] = c;
            }
        }
        Ok(())
    }
}

pub fn capped_cost(state: &AssignmentState, lambda: f64, params: &CappedParams) -> f64 {
    capped_cost_of(state.distances(), lambda, params)
}

/// `argmin_i c̃(λ, C ∪ {i})` and its value, lowest id on ties. Centers
/// already in `C` are candidates with zero marginal.
pub fn best_addition(
    state: &AssignmentState,
    instance: &Instance,
    lambda: f64,
    params: &CappedParams,
) -> (usize, f64) {
    let base = capped_cost(state, lambda, params);
    let dist = state.distances();
    let mut best = (0usize, f64::INFINITY);
    for i in 0..instance.num_centers() {
        let mut delta = 0.0;
        for (j, c) in instance.center_edges(i) {
            let d = dist[j];
            if c < d {
                delta += capped_contribution(c, lambda, params)
                    - capped_contribution(d, lambda, params);
            }
        }
        if delta < best.1 {
            best = (i, delta);
        }
    }
    (best.0, base + best.1)
}
