//! Second phase: given `c̃(λ, C) < 1`, add at most `2k` zero-cost centers so
//! that the true cost drops to at most λ.

use serde::Serialize;

use crate::capped::{capped_contribution, capped_cost, AssignmentState, CappedParams};
use crate::error::{Error, Result};
use crate::instance::NormalizedInstance;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolishStep {
    pub customer: usize,
    pub center: usize,
    #[serde(with = "crate::numeric::ext_real")]
    pub true_cost_after: f64,
}

/// Capped-cost profile once the `2k` customers of largest initial capped
/// cost have been processed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefixBounds {
    pub max_capped: f64,
    pub capped_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolishTrace {
    pub steps: Vec<PolishStep>,
    /// Customers passed over because they already sat at distance 0.
    pub skipped: usize,
    pub prefix_bounds: Option<PrefixBounds>,
}

impl PolishTrace {
    pub fn additions(&self) -> usize {
        self.steps.len()
    }
}

/// Walks customers in decreasing order of initial capped cost (ties by id)
/// and, while `c(C) > λ`, opens the cheapest center of the next customer
/// not yet at distance 0. Returns the enlarged center set.
pub fn polish(
    instance: &NormalizedInstance,
    centers: &[usize],
    lambda: f64,
) -> Result<(Vec<usize>, PolishTrace)> {
    let inst = instance.instance();
    let params = CappedParams::for_instance(inst)?;
    inst.validate()?;
    let mut state = AssignmentState::from_centers(inst, centers)?;
    let mut trace = PolishTrace {
        steps: Vec::new(),
        skipped: 0,
        prefix_bounds: None,
    };

    let initial = capped_cost(&state, lambda, &params);
    if initial >= 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "capped cost {initial} at lambda {lambda} is not below 1"
        )));
    }
    if state.true_cost() <= lambda {
        return Ok((state.chosen().to_vec(), trace));
    }

    let values: Vec<f64> = state
        .distances()
        .iter()
        .map(|&d| capped_contribution(d, lambda, &params))
        .collect();
    let mut order: Vec<usize> = (0..inst.num_customers()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let prefix = 2 * params.k;
    for (processed, &j) in order.iter().enumerate() {
        if processed == prefix {
            trace.prefix_bounds = Some(profile(&state, lambda, &params));
            break;
        }
        if state.true_cost() <= lambda {
            break;
        }
        if state.distances()[j] == 0.0 {
            trace.skipped += 1;
            continue;
        }
        let (center, _) = inst
            .cheapest_center(j)
            .ok_or(Error::IsolatedCustomer(j))?;
        state.add_center(inst, center)?;
        trace.steps.push(PolishStep {
            customer: j,
            center,
            true_cost_after: state.true_cost(),
        });
    }
    let cost = state.true_cost();
    if cost > lambda {
        return Err(Error::InternalInvariantViolation(format!(
            "cost {cost} still above lambda {lambda} after {} additions",
            trace.additions()
        )));
    }
    Ok((state.chosen().to_vec(), trace))
}

fn profile(state: &AssignmentState, lambda: f64, params: &CappedParams) -> PrefixBounds {
    let contributions = state
        .distances()
        .iter()
        .map(|&d| capped_contribution(d, lambda, params));
    PrefixBounds {
        max_capped: contributions.clone().fold(0.0, f64::max),
        capped_total: contributions.sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{normalize, Instance};
    use crate::phase_one::greedy_adaptive;

    fn worked() -> Instance {
        let mut edges: Vec<_> = (0..4).map(|j| (0, j, 1.0)).collect();
        edges.extend((0..6).map(|j| (1, j, 2.0)));
        Instance::new(2, 6, 2, edges).unwrap()
    }

    #[test]
    fn already_cheap_enough_is_unchanged() {
        let norm = normalize(&worked()).unwrap();
        let (centers, trace) = polish(&norm, &[0, 1], 0.5).unwrap();
        assert_eq!(centers, vec![0, 1]);
        assert_eq!(trace.additions(), 0);
    }

    #[test]
    fn covers_two_uncovered_customers_at_zero_lambda() {
        // centers 0..4 serve one customer each at cost 0, center 4 serves 0..4
        let mut edges: Vec<_> = (0..6).map(|j| (j % 5, j, 0.0)).collect();
        edges.extend((0..4).map(|j| (5, j, 0.0)));
        let inst = Instance::new(6, 6, 2, edges).unwrap();
        let norm = normalize(&inst).unwrap();
        let (centers, trace) = polish(&norm, &[5], 0.0).unwrap();
        assert_eq!(trace.additions(), 2);
        assert_eq!(norm.instance().cost_of(&centers), 0.0);
        assert_eq!(centers, vec![5, 4, 0]);
    }

    #[test]
    fn rejects_capped_cost_at_least_one() {
        let norm = normalize(&worked()).unwrap();
        assert!(matches!(
            polish(&norm, &[], 1.0),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn worked_end_to_end() {
        let norm = normalize(&worked()).unwrap();
        let trace = greedy_adaptive(norm.instance()).unwrap();
        let (centers, polish_trace) = polish(&norm, &trace.centers, trace.lambda).unwrap();
        let cost = norm.instance().cost_of(&centers);
        assert!(cost <= trace.lambda);
        assert!(polish_trace.additions() <= 4);
        let original = worked().cost_of(&centers);
        assert!(original <= 8.0);
    }
}
