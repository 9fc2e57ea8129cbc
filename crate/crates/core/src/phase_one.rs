//! First phase: choose at most `T` centers driving the capped cost below 1.
//!
//! [`greedy_adaptive`] needs no LP. It raises λ only as far as needed for
//! some single center to meet the per-iteration target τ, locating that λ
//! by binary search over the sorted breakpoints `(2k+1)(1−2k/n)·c_ij`
//! followed by a closed form inside the bracketing interval. The returned λ
//! never exceeds the LP optimum. [`greedy_fixed`] is the plain greedy at a
//! caller-supplied λ.

use serde::Serialize;

use crate::capped::{best_addition, capped_contribution, capped_cost, AssignmentState, CappedParams};
use crate::error::{Error, Result};
use crate::instance::{phase_one_budget, Instance};
use crate::numeric::CompensatedSum;

/// Relative slack tolerated when the closed-form λ lands on an interval
/// endpoint.
const ENDPOINT_SLACK: f64 = 1e-9;

/// Sorted, deduplicated breakpoints `{scale·c_ij} ∪ {0, ∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointIndex {
    values: Vec<f64>,
}

impl BreakpointIndex {
    pub fn build(instance: &Instance, params: &CappedParams) -> Self {
        let mut values: Vec<f64> = Vec::with_capacity(instance.num_edges() + 2);
        values.push(0.0);
        values.push(f64::INFINITY);
        values.extend(instance.edges().map(|e| params.breakpoint(e.cost)));
        values.sort_by(f64::total_cmp);
        values.dedup();
        BreakpointIndex { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One iteration of a first-phase run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase1Step {
    pub t: usize,
    #[serde(with = "crate::numeric::ext_real")]
    pub lambda_prev: f64,
    /// Target `(1−1/k)·c̃(λ_{t−1}, C_{t−1}) + (1/k)(1−2k/n)`; absent in
    /// fixed-λ runs.
    pub tau: Option<f64>,
    #[serde(with = "crate::numeric::ext_real")]
    pub lambda: f64,
    pub center: usize,
    /// `c̃(λ_{t−1}, C_{t−1})`
    pub capped_before: f64,
    /// `c̃(λ_t, C_t)`
    pub capped_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase1Trace {
    pub steps: Vec<Phase1Step>,
    #[serde(with = "crate::numeric::ext_real")]
    pub lambda: f64,
    /// Distinct chosen centers in insertion order.
    pub centers: Vec<usize>,
    pub budget: usize,
    pub final_capped_cost: f64,
}

impl Phase1Trace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Edges that would lower some customer's distance, grouped by center.
/// Fixed for the duration of one `lambda_step`.
struct Improvements<'a> {
    dist: &'a [f64],
    offsets: Vec<usize>,
    edges: Vec<(usize, f64)>,
}

impl<'a> Improvements<'a> {
    fn new(state: &'a AssignmentState, instance: &Instance) -> Self {
        let dist = state.distances();
        let mut offsets = Vec::with_capacity(instance.num_centers() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for i in 0..instance.num_centers() {
            edges.extend(instance.center_edges(i).filter(|&(j, c)| c < dist[j]));
            offsets.push(edges.len());
        }
        Improvements {
            dist,
            offsets,
            edges,
        }
    }

    fn num_centers(&self) -> usize {
        self.offsets.len() - 1
    }

    fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `(argmin_i c̃(λ, C∪{i}), min value)`, lowest id on ties.
    fn best(&self, lambda: f64, params: &CappedParams) -> (usize, f64) {
        let base: f64 = self
            .dist
            .iter()
            .map(|&d| capped_contribution(d, lambda, params))
            .sum();
        let mut best = (0usize, f64::INFINITY);
        for i in 0..self.num_centers() {
            let delta: f64 = self
                .row(i)
                .iter()
                .map(|&(j, c)| {
                    capped_contribution(c, lambda, params)
                        - capped_contribution(self.dist[j], lambda, params)
                })
                .sum();
            if delta < best.1 {
                best = (i, delta);
            }
        }
        (best.0, base + best.1)
    }
}

/// Smallest `λ ≥ λ_prev` at which some single added center brings the
/// capped cost to at most `tau`, and a center attaining the minimum there.
pub fn lambda_step(
    state: &AssignmentState,
    instance: &Instance,
    lambda_prev: f64,
    tau: f64,
    index: &BreakpointIndex,
    params: &CappedParams,
) -> Result<(f64, usize)> {
    let moves = Improvements::new(state, instance);
    let holds = |lambda: f64| moves.best(lambda, params).1 <= tau;

    if holds(lambda_prev) {
        return Ok((lambda_prev, moves.best(lambda_prev, params).0));
    }

    let bp = index.values();
    // first breakpoint strictly above λ_prev; bp[0] = 0 ≤ λ_prev, so start ≥ 1
    let start = bp.partition_point(|&b| b <= lambda_prev);
    if start >= bp.len() {
        return Err(Error::InternalInvariantViolation(format!(
            "condition fails at lambda = {lambda_prev} with no breakpoint above it"
        )));
    }
    let (mut lo, mut hi) = (start, bp.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if holds(bp[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let lower = bp[lo - 1];
    let upper = bp[lo];

    // Inside (lower, upper] a customer at distance d is uncapped iff its
    // breakpoint is at most `lower`.
    let uncapped = |d: f64| params.breakpoint(d) <= lower;
    let mut base_cost = CompensatedSum::default();
    let mut base_unassigned = 0usize;
    for &d in moves.dist {
        if uncapped(d) {
            base_cost.add(d);
        } else {
            base_unassigned += 1;
        }
    }

    let mut closed_form = (0usize, f64::INFINITY);
    for i in 0..moves.num_centers() {
        let mut cost = base_cost;
        let mut unassigned = base_unassigned;
        for &(j, c) in moves.row(i) {
            let d = moves.dist[j];
            if uncapped(d) {
                cost.add(-d);
            } else {
                unassigned -= 1;
            }
            if uncapped(c) {
                cost.add(c);
            } else {
                unassigned += 1;
            }
        }
        let room = tau - unassigned as f64 * params.cap;
        let candidate = if room > 0.0 {
            cost.value() * params.shrink / room
        } else {
            f64::INFINITY
        };
        if candidate < closed_form.1 {
            closed_form = (i, candidate);
        }
    }

    let mut lambda = closed_form.1.max(lambda_prev);
    if lambda > upper {
        if lambda <= upper * (1.0 + ENDPOINT_SLACK) {
            lambda = upper;
        } else {
            return Err(Error::InternalInvariantViolation(format!(
                "closed-form lambda {lambda} above bracket ({lower}, {upper}]"
            )));
        }
    } else if lambda <= lower {
        if lambda >= lower * (1.0 - ENDPOINT_SLACK) {
            lambda = lower.next_up();
        } else {
            return Err(Error::InternalInvariantViolation(format!(
                "closed-form lambda {lambda} below bracket ({lower}, {upper}]"
            )));
        }
    }
    Ok((lambda, moves.best(lambda, params).0))
}

/// Adaptive first phase. Returns `(λ, C)` with `c̃(λ, C) < 1`, `|C| ≤ T`
/// and `λ` at most the LP optimum of `instance`.
pub fn greedy_adaptive(instance: &Instance) -> Result<Phase1Trace> {
    let params = CappedParams::for_instance(instance)?;
    instance.validate()?;
    let budget = phase_one_budget(params.k, params.n)?;
    let index = BreakpointIndex::build(instance, &params);

    let mut state = AssignmentState::new(instance);
    let mut lambda = 0.0;
    let mut current = capped_cost(&state, lambda, &params);
    let mut steps = Vec::new();
    while current >= 1.0 {
        if steps.len() == budget {
            return Err(Error::InternalInvariantViolation(format!(
                "capped cost {current} still >= 1 after {budget} iterations"
            )));
        }
        let tau = params.decay() * current + params.shrink / params.k as f64;
        let (next, center) = lambda_step(&state, instance, lambda, tau, &index, &params)?;
        state.add_center(instance, center)?;
        let after = capped_cost(&state, next, &params);
        steps.push(Phase1Step {
            t: steps.len() + 1,
            lambda_prev: lambda,
            tau: Some(tau),
            lambda: next,
            center,
            capped_before: current,
            capped_after: after,
        });
        lambda = next;
        current = after;
    }
    Ok(Phase1Trace {
        steps,
        lambda,
        centers: state.chosen().to_vec(),
        budget,
        final_capped_cost: current,
    })
}

/// Plain greedy at a fixed λ: add the best single center while
/// `c̃(λ, C) ≥ 1`, at most `T` times. Running out of budget certifies that
/// λ is below the LP optimum.
pub fn greedy_fixed(instance: &Instance, lambda: f64) -> Result<Phase1Trace> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::BadParameters(format!(
            "lambda {lambda} must be nonnegative"
        )));
    }
    let params = CappedParams::for_instance(instance)?;
    instance.validate()?;
    let budget = phase_one_budget(params.k, params.n)?;

    let mut state = AssignmentState::new(instance);
    let mut current = capped_cost(&state, lambda, &params);
    let mut steps = Vec::new();
    while current >= 1.0 {
        if steps.len() == budget {
            return Err(Error::BudgetExhausted {
                lambda,
                iterations: budget,
                capped_cost: current,
            });
        }
        let (center, _) = best_addition(&state, instance, lambda, &params);
        state.add_center(instance, center)?;
        let after = capped_cost(&state, lambda, &params);
        steps.push(Phase1Step {
            t: steps.len() + 1,
            lambda_prev: lambda,
            tau: None,
            lambda,
            center,
            capped_before: current,
            capped_after: after,
        });
        current = after;
    }
    Ok(Phase1Trace {
        steps,
        lambda,
        centers: state.chosen().to_vec(),
        budget,
        final_capped_cost: current,
    })
}
