//! Slow, independent references for checking the solver at desk scale.

use serde::Serialize;

use crate::capped::{AssignmentState, CappedParams};
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Largest number of subsets [`brute_force_opt`] will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    #[serde(with = "crate::numeric::ext_real")]
    pub best_cost: f64,
    /// Sorted; lexicographically smallest among optimal sets.
    pub best_set: Vec<usize>,
    pub enumerated_count: u64,
}

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, x| acc * (n - x) as u128 / (x + 1) as u128)
}

/// Dense `|U| × n` cost table with `∞` for missing pairs.
fn dense_costs(instance: &Instance) -> Vec<f64> {
    let n = instance.num_customers();
    let mut table = vec![f64::INFINITY; instance.num_centers() * n];
    for e in instance.edges() {
        table[e.center * n + e.customer] = e.cost;
    }
    table
}

/// Exact minimum cost over all center sets of size `min(k, |U|)`, by
/// enumeration in colexicographic order.
pub fn brute_force_opt(instance: &Instance, k: usize) -> Result<OptResult> {
    if k == 0 {
        return Err(Error::BadParameters("k must be at least 1".into()));
    }
    let (u, n) = (instance.num_centers(), instance.num_customers());
    let size = k.min(u);
    let count = binomial(u, size);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let table = dense_costs(instance);
    let mut combo: Vec<usize> = (0..size).collect();
    let mut best_cost = f64::INFINITY;
    let mut best_set: Option<Vec<usize>> = None;
    let mut enumerated = 0u64;
    loop {
        enumerated += 1;
        let mut total = 0.0;
        let mut pruned = false;
        for j in 0..n {
            let nearest = combo
                .iter()
                .map(|&i| table[i * n + j])
                .fold(f64::INFINITY, f64::min);
            total += nearest;
            if total > best_cost {
                pruned = true;
                break;
            }
        }
        if !pruned {
            let better = total < best_cost
                || best_set.as_ref().is_none_or(|b| combo.as_slice() < b.as_slice());
            if better {
                best_cost = total;
                best_set = Some(combo.clone());
            }
        }

        // next combination in colex order
        let mut p = 0;
        while p < size {
            let limit = if p + 1 < size { combo[p + 1] } else { u };
            if combo[p] + 1 < limit {
                break;
            }
            p += 1;
        }
        if p == size {
            break;
        }
        combo[p] += 1;
        for (q, slot) in combo.iter_mut().enumerate().take(p) {
            *slot = q;
        }
    }
    Ok(OptResult {
        best_cost,
        best_set: best_set.unwrap_or_default(),
        enumerated_count: enumerated,
    })
}

/// Dense re-derivation of one adaptive λ step: every breakpoint interval
/// is scanned, each center's capped cost is rebuilt from scratch, and the
/// linear/capped split is decided by evaluating at an interior point.
pub fn reference_lambda_step(
    state: &AssignmentState,
    instance: &Instance,
    lambda_prev: f64,
    tau: f64,
    params: &CappedParams,
) -> (f64, usize) {
    let (u, n) = (instance.num_centers(), instance.num_customers());
    let table = dense_costs(instance);
    let dist = state.distances();
    let merged: Vec<Vec<f64>> = (0..u)
        .map(|i| (0..n).map(|j| dist[j].min(table[i * n + j])).collect())
        .collect();

    let share = |d: f64, lambda: f64| -> f64 {
        if d == 0.0 || lambda == f64::INFINITY {
            0.0
        } else if lambda == 0.0 || d == f64::INFINITY {
            params.cap
        } else {
            params.cap.min(params.shrink * d / lambda)
        }
    };
    let value = |i: usize, lambda: f64| -> f64 { merged[i].iter().map(|&d| share(d, lambda)).sum() };
    let argmin = |lambda: f64| -> (usize, f64) {
        (0..u).fold((0, f64::INFINITY), |best, i| {
            let v = value(i, lambda);
            if v < best.1 {
                (i, v)
            } else {
                best
            }
        })
    };

    if argmin(lambda_prev).1 <= tau {
        return (lambda_prev, argmin(lambda_prev).0);
    }

    let mut points: Vec<f64> = table
        .iter()
        .filter(|c| c.is_finite())
        .map(|&c| (2.0 * params.k as f64 + 1.0) * params.shrink * c)
        .collect();
    points.push(0.0);
    points.push(f64::INFINITY);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut best = f64::INFINITY;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lambda_prev {
            continue;
        }
        let start = lo.max(lambda_prev);
        let probe = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo + 1.0 };
        for row in &merged {
            let mut assigned_cost = 0.0;
            let mut unassigned = 0usize;
            for &d in row {
                if params.shrink * d / probe >= params.cap {
                    unassigned += 1;
                } else {
                    assigned_cost += d;
                }
            }
            let room = tau - unassigned as f64 * params.cap;
            if room <= 0.0 {
                continue;
            }
            let candidate = (assigned_cost * params.shrink / room).max(start);
            if candidate <= hi * (1.0 + 1e-12) {
                best = best.min(candidate.min(hi));
            }
        }
    }
    (best, argmin(best).0)
}

/// `b` with its `count` largest entries (ties by lower index) set to zero.
pub fn zero_top_values(b: &[f64], count: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&x, &y| b[y].total_cmp(&b[x]).then(x.cmp(&y)));
    let mut out = b.to_vec();
    for &idx in order.iter().take(count) {
        out[idx] = 0.0;
    }
    out
}
