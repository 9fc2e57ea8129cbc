//! Preprocess, run both phases, and report the result on the original
//! cost scale.

use serde::Serialize;

use crate::certificate::{certificate_sweep, DualCertificate};
use crate::error::{Error, Result};
use crate::instance::{normalize, phase_one_budget, solve_k1, solve_large_k, Instance};
use crate::phase_one::{greedy_adaptive, greedy_fixed, Phase1Trace};
use crate::phase_two::{polish, PolishTrace};

/// Relative slack below the total offset still accepted as a fixed λ of 0.
const OFFSET_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Adaptive first phase; needs no bound on the optimum.
    Fast,
    /// Greedy at a caller-supplied λ on the original cost scale, which must
    /// be at least the LP optimum (any size-k solution's cost will do).
    FixedLambda(f64),
}

/// How a solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `k ≥ |U|`: every center is opened.
    AllCenters,
    /// `k = 1`: best single center.
    SingleCenter,
    /// `k > n/3`: each customer's cheapest center.
    CheapestPerCustomer,
    TwoPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub route: Route,
    /// Sorted center ids.
    pub centers: Vec<usize>,
    /// Nearest chosen center per customer, lowest id on ties.
    pub assignment: Vec<usize>,
    /// Cost on the original instance.
    pub cost: f64,
    /// Phase-one λ on the normalized scale.
    pub lambda: Option<f64>,
    /// Certified lower bound on the LP optimum, original scale.
    pub lower_bound: f64,
    /// Dual point achieving `lower_bound`, on the original instance.
    pub certificate: Option<DualCertificate>,
    pub size_bound: usize,
    pub alpha: Option<f64>,
    pub offset_total: f64,
    /// Cost of `centers` on the normalized instance.
    pub normalized_cost: Option<f64>,
    /// Normalized-scale dual objective of every pair visited in phase one.
    pub dual_objectives: Vec<f64>,
    pub phase1: Option<Phase1Trace>,
    pub polish: Option<PolishTrace>,
}

impl Solution {
    pub fn size(&self) -> usize {
        self.centers.len()
    }

    pub fn phase1_iterations(&self) -> usize {
        self.phase1.as_ref().map_or(0, |t| t.iterations())
    }

    pub fn phase2_additions(&self) -> usize {
        self.polish.as_ref().map_or(0, |t| t.additions())
    }

    pub fn gap(&self) -> f64 {
        self.cost - self.lower_bound
    }
}

fn exact(instance: &Instance, route: Route, mut centers: Vec<usize>, size_bound: usize) -> Result<Solution> {
    centers.sort_unstable();
    centers.dedup();
    let cost = instance.cost_of(&centers);
    let assignment = assignment_of(instance, &centers)?;
    Ok(Solution {
        route,
        centers,
        assignment,
        cost,
        lambda: None,
        // each of these routes attains Σ_j min_i c_ij or the exact k = 1
        // optimum, both of which equal the LP optimum
        lower_bound: cost,
        certificate: None,
        size_bound,
        alpha: None,
        offset_total: 0.0,
        normalized_cost: None,
        dual_objectives: Vec::new(),
        phase1: None,
        polish: None,
    })
}

fn assignment_of(instance: &Instance, centers: &[usize]) -> Result<Vec<usize>> {
    instance
        .assign(centers)
        .into_iter()
        .enumerate()
        .map(|(j, a)| {
            a.ok_or_else(|| {
                Error::InternalInvariantViolation(format!("customer {} left unassigned", j + 1))
            })
        })
        .collect()
}

/// Returns at most `T + 2k` centers whose cost is at most that of every
/// size-k center set.
pub fn solve(instance: &Instance, mode: Mode) -> Result<Solution> {
    instance.validate()?;
    let (u, n, k) = (instance.num_centers(), instance.num_customers(), instance.k());
    if k >= u {
        return exact(instance, Route::AllCenters, (0..u).collect(), u);
    }
    if k == 1 {
        return exact(instance, Route::SingleCenter, vec![solve_k1(instance)?], 1);
    }
    if 3 * k > n {
        return exact(
            instance,
            Route::CheapestPerCustomer,
            solve_large_k(instance)?,
            n,
        );
    }

    let normalized = normalize(instance)?;
    let shifted = normalized.instance();
    let offset = normalized.offset_total();
    let budget = phase_one_budget(k, n)?;

    let trace = match mode {
        Mode::Fast => greedy_adaptive(shifted)?,
        Mode::FixedLambda(lambda) => {
            if lambda.is_nan() {
                return Err(Error::BadParameters("lambda is NaN".into()));
            }
            let mut local = lambda - offset;
            if local < 0.0 {
                if local >= -OFFSET_SLACK * offset.max(1.0) {
                    local = 0.0;
                } else {
                    // every center set costs at least the total offset
                    return Err(Error::BudgetExhausted {
                        lambda,
                        iterations: 0,
                        capped_cost: n as f64 / (2 * k + 1) as f64,
                    });
                }
            }
            greedy_fixed(shifted, local).map_err(|e| match e {
                Error::BudgetExhausted {
                    iterations,
                    capped_cost,
                    ..
                } => Error::BudgetExhausted {
                    lambda,
                    iterations,
                    capped_cost,
                },
                other => other,
            })?
        }
    };

    let (mut centers, polish_trace) = polish(&normalized, &trace.centers, trace.lambda)?;
    let sweep = certificate_sweep(shifted, &trace)?;
    let certificate = sweep.best.denormalize(&normalized);

    centers.sort_unstable();
    centers.dedup();
    let cost = instance.cost_of(&centers);
    if cost == f64::INFINITY {
        // only reachable with λ = ∞, which phase one returns only when no
        // fractional k-cover exists
        return Err(Error::Infeasible(format!(
            "no {k} centers can serve every customer"
        )));
    }
    let assignment = assignment_of(instance, &centers)?;
    let size_bound = budget + 2 * k;
    Ok(Solution {
        route: Route::TwoPhase,
        assignment,
        cost,
        lambda: Some(trace.lambda),
        lower_bound: certificate.objective,
        certificate: Some(certificate),
        size_bound,
        alpha: Some(size_bound as f64 / k as f64),
        offset_total: offset,
        normalized_cost: Some(shifted.cost_of(&centers)),
        dual_objectives: sweep.objectives,
        phase1: Some(trace),
        polish: Some(polish_trace),
        centers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_planted, gen_uniform};
    use crate::instance::{from_setcover, SetCoverInstance};

    fn worked() -> Instance {
        let mut edges: Vec<_> = (0..4).map(|j| (0, j, 1.0)).collect();
        edges.extend((0..6).map(|j| (1, j, 2.0)));
        Instance::new(2, 6, 2, edges).unwrap()
    }

    #[test]
    fn worked_instance_meets_optimum() {
        let s = solve(&worked(), Mode::Fast).unwrap();
        // k = |U| here, so every center opens
        assert_eq!(s.route, Route::AllCenters);
        assert!(s.cost <= 8.0);

        let mut edges: Vec<_> = (0..4).map(|j| (0, j, 1.0)).collect();
        edges.extend((0..6).map(|j| (1, j, 2.0)));
        edges.push((2, 0, 5.0));
        let three = Instance::new(3, 6, 2, edges).unwrap();
        let s = solve(&three, Mode::Fast).unwrap();
        assert_eq!(s.route, Route::TwoPhase);
        assert!(s.cost <= 8.0, "{}", s.cost);
        assert!(s.size() <= s.size_bound);
        assert!(s.lower_bound <= s.cost + 1e-9);
        let fixed = solve(&three, Mode::FixedLambda(8.0)).unwrap();
        assert!(fixed.cost <= 8.0);
    }

    #[test]
    fn planted_zero_cost() {
        let p = gen_planted(10, 30, 3, 0.0, 5).unwrap();
        let s = solve(&p.instance, Mode::Fast).unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.lambda, Some(0.0));
        assert!(s.size() as f64 <= s.alpha.unwrap() * 3.0);
    }

    #[test]
    fn k1_route_is_exact() {
        let inst = gen_uniform(4, 9, 1.0, 1, 2).unwrap();
        let s = solve(&inst, Mode::Fast).unwrap();
        assert_eq!(s.route, Route::SingleCenter);
        assert_eq!(s.size(), 1);
        let best = (0..4).map(|i| inst.cost_of(&[i])).fold(f64::INFINITY, f64::min);
        assert_eq!(s.cost, best);
    }

    #[test]
    fn large_k_route() {
        let inst = gen_uniform(6, 9, 0.5, 4, 2).unwrap();
        let s = solve(&inst, Mode::Fast).unwrap();
        assert_eq!(s.route, Route::CheapestPerCustomer);
        assert_eq!(s.gap(), 0.0);
    }

    #[test]
    fn isolated_customer_is_infeasible() {
        let inst = Instance::new(2, 3, 1, [(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(
            solve(&inst, Mode::Fast).unwrap_err(),
            Error::IsolatedCustomer(2)
        );
    }

    #[test]
    fn fixed_lambda_below_offset_is_exhausted() {
        let inst = gen_uniform(8, 24, 0.5, 2, 4).unwrap();
        assert!(matches!(
            solve(&inst, Mode::FixedLambda(0.0)),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn setcover_with_cover_costs_zero() {
        let system = SetCoverInstance {
            num_elements: 9,
            k: 3,
            sets: vec![
                vec![0, 1, 2],
                vec![3, 4, 5],
                vec![6, 7, 8],
                vec![0, 3, 6],
                vec![1, 4],
            ],
        };
        let s = solve(&from_setcover(&system).unwrap(), Mode::Fast).unwrap();
        assert_eq!(s.cost, 0.0);
    }

    #[test]
    fn deterministic() {
        let inst = gen_uniform(15, 45, 0.3, 3, 8).unwrap();
        assert_eq!(
            solve(&inst, Mode::Fast).unwrap(),
            solve(&inst, Mode::Fast).unwrap()
        );
    }
}
