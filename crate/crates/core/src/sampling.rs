//! Randomized rounding of a fractional LP point to a partial assignment,
//! and Monte-Carlo checks of its expectation bounds.
//!
//! Each round draws a center `i` with probability `x_i/k`, then
//! independently reassigns every customer `j` to `i` with probability
//! `y_ij/x_i`. A customer is reached in one round with probability exactly
//! `Σ_i y_ij / k = 1/k`.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capped::{best_addition, capped_cost, AssignmentState, CappedParams};
use crate::error::{Error, Result};
use crate::instance::Instance;

pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YEntry {
    pub center: usize,
    pub customer: usize,
    pub value: f64,
}

/// A point `(x, y)` of the LP relaxation; `y` is sparse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    pub y: Vec<YEntry>,
}

impl FractionalSolution {
    /// The integral point of a center set: `x` its indicator, `y` the
    /// nearest-center assignment (lowest id on ties).
    pub fn integral(instance: &Instance, centers: &[usize]) -> Result<Self> {
        let mut x = vec![0.0; instance.num_centers()];
        for &i in centers {
            if i >= x.len() {
                return Err(Error::BadIndex {
                    what: "center",
                    id: i,
                    limit: x.len(),
                });
            }
            x[i] = 1.0;
        }
        let y = instance
            .assign(centers)
            .into_iter()
            .enumerate()
            .map(|(j, a)| {
                a.map(|i| YEntry {
                    center: i,
                    customer: j,
                    value: 1.0,
                })
                .ok_or(Error::InfeasibleFractional(format!(
                    "customer {} has no edge into the center set",
                    j + 1
                )))
            })
            .collect::<Result<_>>()?;
        Ok(FractionalSolution { x, y })
    }

    /// `c·y`; infinite if `y` puts weight on a missing edge.
    pub fn cost(&self, instance: &Instance) -> f64 {
        self.y
            .iter()
            .filter(|e| e.value != 0.0)
            .map(|e| instance.cost(e.center, e.customer) * e.value)
            .sum()
    }
}

/// Worst residual per LP constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `max(0, −y_ij, y_ij − x_i, −x_i)`
    pub bounds: f64,
    /// `|Σ_i y_ij − 1|`
    pub row_sums: f64,
    /// `|Σ_i x_i − k|`
    pub total: f64,
    /// Largest `y` placed on a pair that is not an edge.
    pub off_support: f64,
    pub feasible: bool,
}

pub fn check_feasible(frac: &FractionalSolution, instance: &Instance) -> Result<FeasibilityReport> {
    let (u, n) = (instance.num_centers(), instance.num_customers());
    if frac.x.len() != u {
        return Err(Error::BadParameters(format!(
            "x has {} entries, instance has {u} centers",
            frac.x.len()
        )));
    }
    let mut bounds = frac.x.iter().fold(0.0f64, |acc, &x| acc.max(-x));
    let mut rows = vec![0.0; n];
    let mut off_support = 0.0f64;
    for e in &frac.y {
        if e.center >= u {
            return Err(Error::BadIndex {
                what: "center",
                id: e.center,
                limit: u,
            });
        }
        if e.customer >= n {
            return Err(Error::BadIndex {
                what: "customer",
                id: e.customer,
                limit: n,
            });
        }
        bounds = bounds.max(-e.value).max(e.value - frac.x[e.center]);
        rows[e.customer] += e.value;
        if e.value != 0.0 && instance.cost(e.center, e.customer).is_infinite() {
            off_support = off_support.max(e.value.abs());
        }
    }
    let row_sums = rows.iter().fold(0.0f64, |acc, &r| acc.max((r - 1.0).abs()));
    let total = (frac.x.iter().sum::<f64>() - instance.k() as f64).abs();
    let feasible = bounds <= FEASIBILITY_TOLERANCE
        && row_sums <= FEASIBILITY_TOLERANCE
        && total <= FEASIBILITY_TOLERANCE
        && off_support == 0.0;
    Ok(FeasibilityReport {
        bounds,
        row_sums,
        total,
        off_support,
        feasible,
    })
}

/// `a_j ∈ U ∪ {none}` with its cost over assigned customers and the number
/// of unassigned ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialAssignment {
    pub assigned: Vec<Option<usize>>,
    pub cost: f64,
    pub unassigned: usize,
}

impl PartialAssignment {
    pub fn from_assignment(instance: &Instance, assigned: Vec<Option<usize>>) -> Self {
        let cost = assigned
            .iter()
            .enumerate()
            .filter_map(|(j, a)| a.map(|i| instance.cost(i, j)))
            .sum();
        let unassigned = assigned.iter().filter(|a| a.is_none()).count();
        PartialAssignment {
            assigned,
            cost,
            unassigned,
        }
    }
}

/// Precomputed draw distribution and per-center reassignment lists.
struct Sampler {
    draw: WeightedIndex<f64>,
    reach: Vec<Vec<(usize, f64)>>,
    n: usize,
}

impl Sampler {
    fn new(frac: &FractionalSolution, instance: &Instance) -> Result<Self> {
        let report = check_feasible(frac, instance)?;
        if !report.feasible {
            return Err(Error::InfeasibleFractional(format!(
                "bounds {:.3e}, row sums {:.3e}, total {:.3e}, off-support {:.3e}",
                report.bounds, report.row_sums, report.total, report.off_support
            )));
        }
        let draw = WeightedIndex::new(frac.x.iter().map(|&x| x.max(0.0)))
            .map_err(|e| Error::InfeasibleFractional(e.to_string()))?;
        let mut reach = vec![Vec::new(); frac.x.len()];
        for e in &frac.y {
            let x = frac.x[e.center];
            if x > 0.0 && e.value > 0.0 {
                reach[e.center].push((e.customer, (e.value / x).min(1.0)));
            }
        }
        Ok(Sampler {
            draw,
            reach,
            n: instance.num_customers(),
        })
    }

    fn run(&self, rounds: usize, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
        let mut assigned = vec![None; self.n];
        for _ in 0..rounds {
            let i = self.draw.sample(rng);
            for &(j, p) in &self.reach[i] {
                if rng.random::<f64>() < p {
                    assigned[j] = Some(i);
                }
            }
        }
        assigned
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One run of the rounding scheme. Deterministic in `seed`.
pub fn sample_round(
    frac: &FractionalSolution,
    instance: &Instance,
    rounds: usize,
    seed: u64,
) -> Result<PartialAssignment> {
    let sampler = Sampler::new(frac, instance)?;
    let assigned = sampler.run(rounds, &mut trial_rng(seed, 0));
    Ok(PartialAssignment::from_assignment(instance, assigned))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloStats {
    pub trials: usize,
    pub rounds: usize,
    /// `c·y` of the input point.
    pub fractional_cost: f64,
    pub mean_cost: f64,
    pub se_cost: f64,
    pub mean_unassigned: f64,
    pub se_unassigned: f64,
    /// `n(1 − 1/k)^rounds`, the exact expected number of unassigned customers.
    pub expected_unassigned: f64,
    /// Fraction of trials with `c(A) ≥ c·y/(1−2k/n)` or `u(A) ≥ 2k+1`
    /// (`c(A) > 0` stands in for the cost event when `c·y = 0`). Absent when
    /// `k` lies outside `[2, n/3]`.
    pub bad_event_frequency: Option<f64>,
    pub se_bad_event: Option<f64>,
    /// `(1−2k/n)·E[c(A)]/(c·y) + E[u(A)]/(2k+1)` evaluated with the
    /// closed-form expectations `E[c(A)] ≤ c·y` and `E[u(A)]` above.
    pub bad_event_bound: Option<f64>,
}

/// Probability that a customer is never reached in `rounds` rounds.
pub fn miss_probability(k: usize, rounds: usize) -> f64 {
    (1.0 - 1.0 / k as f64).powi(rounds as i32)
}

fn mean_and_se(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.clone().sum::<f64>() / len;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// `trials` independent runs of [`sample_round`]; trial `t` uses stream `t`
/// of `seed`, so trial 0 reproduces `sample_round(.., seed)` and the result
/// does not depend on how trials are scheduled across threads.
pub fn monte_carlo(
    frac: &FractionalSolution,
    instance: &Instance,
    rounds: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloStats> {
    if trials == 0 {
        return Err(Error::BadParameters("trials must be at least 1".into()));
    }
    let sampler = Sampler::new(frac, instance)?;
    let outcomes: Vec<PartialAssignment> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let assigned = sampler.run(rounds, &mut trial_rng(seed, t));
            PartialAssignment::from_assignment(instance, assigned)
        })
        .collect();

    let fractional_cost = frac.cost(instance);
    let (mean_cost, se_cost) = mean_and_se(outcomes.iter().map(|o| o.cost));
    let (mean_unassigned, se_unassigned) =
        mean_and_se(outcomes.iter().map(|o| o.unassigned as f64));
    let n = instance.num_customers();
    let k = instance.k();
    let expected_unassigned = n as f64 * miss_probability(k, rounds);

    let (mut freq, mut se_freq, mut bound) = (None, None, None);
    if let Ok(params) = CappedParams::for_instance(instance) {
        let threshold = fractional_cost / params.shrink;
        let bad = |o: &PartialAssignment| {
            let costly = if fractional_cost > 0.0 {
                o.cost >= threshold
            } else {
                o.cost > 0.0
            };
            costly || o.unassigned > 2 * k
        };
        let (f, se) = mean_and_se(outcomes.iter().map(|o| if bad(o) { 1.0 } else { 0.0 }));
        freq = Some(f);
        se_freq = Some(se);
        bound = Some(params.shrink + expected_unassigned * params.cap);
    }
    Ok(MonteCarloStats {
        trials,
        rounds,
        fractional_cost,
        mean_cost,
        se_cost,
        mean_unassigned,
        se_unassigned,
        expected_unassigned,
        bad_event_frequency: freq,
        se_bad_event: se_freq,
        bad_event_bound: bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleStepReport {
    /// `min_i c̃(λ, C∪{i})`
    pub best: f64,
    /// Average of `c̃(λ, C∪{i})` over `i ∈ C*`.
    pub mean_over_reference: f64,
    /// `(1−1/k)·c̃(λ, C) + (1/k)(1−2k/n)·c(C*)/λ`
    pub bound: f64,
    pub holds: bool,
}

/// Checks one greedy step against a size-≤k reference set `C*` covering
/// every customer: adding a uniformly random member of `C*` lowers the
/// capped cost in expectation to at most the bound, hence so does the best
/// single center.
pub fn single_step_bound_check(
    instance: &Instance,
    lambda: f64,
    centers: &[usize],
    reference: &[usize],
) -> Result<SingleStepReport> {
    let params = CappedParams::for_instance(instance)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::BadParameters(format!(
            "lambda {lambda} must be positive"
        )));
    }
    let mut distinct = reference.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.is_empty() || distinct.len() > params.k {
        return Err(Error::BadParameters(format!(
            "reference set has {} centers, need 1..={}",
            distinct.len(),
            params.k
        )));
    }
    let reference_cost = instance.cost_of(&distinct);
    if !reference_cost.is_finite() {
        return Err(Error::PreconditionViolated(
            "reference set leaves a customer uncovered".into(),
        ));
    }
    let state = AssignmentState::from_centers(instance, centers)?;
    let current = capped_cost(&state, lambda, &params);
    let (_, best) = best_addition(&state, instance, lambda, &params);
    let mean_over_reference = distinct
        .iter()
        .map(|&i| {
            let mut with = state.clone();
            with.add_center(instance, i)?;
            Ok(capped_cost(&with, lambda, &params))
        })
        .sum::<Result<f64>>()?
        / distinct.len() as f64;
    let ratio = if lambda == f64::INFINITY {
        0.0
    } else {
        reference_cost / lambda
    };
    let bound = params.decay() * current + params.shrink * ratio / params.k as f64;
    let holds = best <= mean_over_reference + FEASIBILITY_TOLERANCE
        && mean_over_reference <= bound + FEASIBILITY_TOLERANCE;
    Ok(SingleStepReport {
        best,
        mean_over_reference,
        bound,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> Instance {
        let mut edges: Vec<_> = (0..4).map(|j| (0, j, 1.0)).collect();
        edges.extend((0..6).map(|j| (1, j, 2.0)));
        Instance::new(2, 6, 2, edges).unwrap()
    }

    #[test]
    fn integral_point_is_feasible() {
        let inst = worked();
        let frac = FractionalSolution::integral(&inst, &[0, 1]).unwrap();
        let report = check_feasible(&frac, &inst).unwrap();
        assert!(report.feasible, "{report:?}");
        assert_eq!(frac.cost(&inst), 8.0);
        assert!(FractionalSolution::integral(&inst, &[0]).is_err());
    }

    #[test]
    fn uniform_split_on_complete_graph() {
        let (u, n, k) = (4, 6, 2);
        let edges = (0..u).flat_map(|i| (0..n).map(move |j| (i, j, (i + j) as f64)));
        let inst = Instance::new(u, n, k, edges).unwrap();
        let x = vec![k as f64 / u as f64; u];
        let y = (0..u)
            .flat_map(|i| {
                (0..n).map(move |j| YEntry {
                    center: i,
                    customer: j,
                    value: 1.0 / u as f64,
                })
            })
            .collect();
        let frac = FractionalSolution { x, y };
        assert!(check_feasible(&frac, &inst).unwrap().feasible);
    }

    #[test]
    fn short_row_is_reported() {
        let inst = worked();
        let mut frac = FractionalSolution::integral(&inst, &[0, 1]).unwrap();
        frac.y[0].value = 0.9;
        let report = check_feasible(&frac, &inst).unwrap();
        assert!(!report.feasible);
        assert!((report.row_sums - 0.1).abs() < 1e-12);
        assert!(matches!(
            sample_round(&frac, &inst, 3, 1),
            Err(Error::InfeasibleFractional(_))
        ));
    }

    #[test]
    fn single_full_center_assigns_everyone() {
        // k = 1 so x may sit on one center
        let inst = Instance::new(2, 6, 1, (0..6).map(|j| (1, j, 0.5))).unwrap();
        let frac = FractionalSolution::integral(&inst, &[1]).unwrap();
        let a = sample_round(&frac, &inst, 1, 42).unwrap();
        assert!(a.assigned.iter().all(|&c| c == Some(1)));
        assert_eq!((a.cost, a.unassigned), (3.0, 0));
    }

    #[test]
    fn zero_rounds_assign_nothing() {
        let inst = worked();
        let frac = FractionalSolution::integral(&inst, &[0, 1]).unwrap();
        let a = sample_round(&frac, &inst, 0, 3).unwrap();
        assert_eq!((a.cost, a.unassigned), (0.0, 6));
    }

    #[test]
    fn reproducible_and_consistent() {
        let inst = worked();
        let frac = FractionalSolution::integral(&inst, &[0, 1]).unwrap();
        let a = sample_round(&frac, &inst, 2, 11).unwrap();
        assert_eq!(a, sample_round(&frac, &inst, 2, 11).unwrap());
        assert_eq!(
            a,
            PartialAssignment::from_assignment(&inst, a.assigned.clone())
        );
        let one = monte_carlo(&frac, &inst, 2, 1, 11).unwrap();
        assert_eq!(one.mean_cost, a.cost);
        assert_eq!(one.mean_unassigned, a.unassigned as f64);
        assert_eq!(one.se_cost, 0.0);
    }

    #[test]
    fn single_step_with_reference_as_current() {
        let inst = worked();
        let r = single_step_bound_check(&inst, 3.0, &[0, 1], &[0, 1]).unwrap();
        assert!(r.holds);
        let current = capped_cost(
            &AssignmentState::from_centers(&inst, &[0, 1]).unwrap(),
            3.0,
            &CappedParams::for_instance(&inst).unwrap(),
        );
        assert!(r.best <= current);

        let r = single_step_bound_check(&inst, f64::INFINITY, &[], &[0, 1]).unwrap();
        assert!(r.holds);
        assert_eq!(r.best, 0.0);

        assert!(single_step_bound_check(&inst, 0.0, &[], &[0, 1]).is_err());
        assert!(single_step_bound_check(&inst, 1.0, &[], &[0]).is_err());
    }
}
