//! Lower bounds on the LP optimum from feasible points of its dual
//!
//! ```text
//! maximize  −k·μ + Σ_j δ_j
//! s.t.      π_ij ≥ 0,  π_ij ≥ δ_j − c_ij,  μ ≥ Σ_j π_ij   (all i, j)
//! ```
//!
//! Every pair `(λ, C)` visited by the first phase yields such a point in
//! closed form: `δ_j = min(λ/((1−2k/n)(2k+1)), d_j)`,
//! `π_ij = max(0, δ_j − c_ij)` and `μ = max_i Σ_j π_ij`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::capped::{AssignmentState, CappedParams};
use crate::error::{Error, Result};
use crate::instance::{Instance, NormalizedInstance};
use crate::phase_one::Phase1Trace;

/// Absolute tolerance for every dual feasibility family.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiEntry {
    pub center: usize,
    pub customer: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    #[serde(with = "crate::numeric::ext_real")]
    pub lambda: f64,
    pub centers: Vec<usize>,
    pub delta: Vec<f64>,
    /// Positive entries only; every other pair is implicitly 0.
    pub pi: Vec<PiEntry>,
    pub mu: f64,
    pub objective: f64,
    /// Built from λ ∈ {0, ∞}: the all-zero point.
    pub degenerate: bool,
}

impl DualCertificate {
    fn trivial(n: usize, lambda: f64, centers: Vec<usize>) -> Self {
        DualCertificate {
            lambda,
            centers,
            delta: vec![0.0; n],
            pi: Vec::new(),
            mu: 0.0,
            objective: 0.0,
            degenerate: true,
        }
    }

    /// Maps a certificate of the shifted instance to the original one by
    /// adding each customer's offset to `δ_j`. `π` and `μ` are unchanged and
    /// the objective grows by the total offset.
    pub fn denormalize(&self, normalized: &NormalizedInstance) -> DualCertificate {
        let delta: Vec<f64> = self
            .delta
            .iter()
            .zip(normalized.customer_offsets())
            .map(|(d, off)| d + off)
            .collect();
        let k = normalized.instance().k() as f64;
        let objective = -k * self.mu + delta.iter().sum::<f64>();
        DualCertificate {
            delta,
            objective,
            ..self.clone()
        }
    }
}

/// Closed-form dual point for `(λ, C)`. λ ∈ {0, ∞} gives the trivial
/// all-zero certificate, flagged `degenerate`.
pub fn build_certificate(
    instance: &Instance,
    lambda: f64,
    centers: &[usize],
) -> Result<DualCertificate> {
    let params = CappedParams::for_instance(instance)?;
    let state = AssignmentState::from_centers(instance, centers)?;
    certificate_from_state(instance, lambda, &state, &params)
}

pub fn certificate_from_state(
    instance: &Instance,
    lambda: f64,
    state: &AssignmentState,
    params: &CappedParams,
) -> Result<DualCertificate> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::BadParameters(format!(
            "lambda {lambda} must be nonnegative"
        )));
    }
    let n = instance.num_customers();
    let centers = state.chosen().to_vec();
    if lambda == 0.0 || lambda == f64::INFINITY {
        return Ok(DualCertificate::trivial(n, lambda, centers));
    }
    let ceiling = lambda / params.scale;
    let delta: Vec<f64> = state.distances().iter().map(|&d| d.min(ceiling)).collect();

    let mut pi = Vec::new();
    let mut mu = 0.0f64;
    for i in 0..instance.num_centers() {
        let mut row = 0.0;
        for (j, c) in instance.center_edges(i) {
            let value = delta[j] - c;
            if value > 0.0 {
                pi.push(PiEntry {
                    center: i,
                    customer: j,
                    value,
                });
                row += value;
            }
        }
        mu = mu.max(row);
    }
    let objective = -(params.k as f64) * mu + delta.iter().sum::<f64>();
    Ok(DualCertificate {
        lambda,
        centers,
        delta,
        pi,
        mu,
        objective,
        degenerate: false,
    })
}

/// Worst violation per constraint family, each clamped at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub pi_nonnegative: f64,
    pub pi_covers_delta: f64,
    pub mu_covers_rows: f64,
    pub objective_error: f64,
    pub recomputed_objective: f64,
    pub feasible: bool,
}

/// Re-checks dual feasibility of `cert` against `instance` and recomputes
/// its objective.
pub fn verify_certificate(cert: &DualCertificate, instance: &Instance) -> Result<CertificateReport> {
    let n = instance.num_customers();
    if cert.delta.len() != n {
        return Err(Error::BadParameters(format!(
            "certificate has {} delta entries, instance has {n} customers",
            cert.delta.len()
        )));
    }
    let mut pi: HashMap<(usize, usize), f64> = HashMap::with_capacity(cert.pi.len());
    let mut pi_nonnegative = 0.0f64;
    let mut rows = vec![0.0; instance.num_centers()];
    for e in &cert.pi {
        if e.center >= instance.num_centers() {
            return Err(Error::BadIndex {
                what: "center",
                id: e.center,
                limit: instance.num_centers(),
            });
        }
        if e.customer >= n {
            return Err(Error::BadIndex {
                what: "customer",
                id: e.customer,
                limit: n,
            });
        }
        if pi.insert((e.center, e.customer), e.value).is_some() {
            return Err(Error::BadParameters(format!(
                "duplicate pi entry for ({}, {})",
                e.center + 1,
                e.customer + 1
            )));
        }
        pi_nonnegative = pi_nonnegative.max(-e.value);
        rows[e.center] += e.value;
    }

    // non-edges have c = ∞, so π ≥ δ − c holds there for any finite δ
    let mut pi_covers_delta = 0.0f64;
    for edge in instance.edges() {
        let value = pi.get(&(edge.center, edge.customer)).copied().unwrap_or(0.0);
        pi_covers_delta = pi_covers_delta.max(cert.delta[edge.customer] - edge.cost - value);
    }
    if cert.delta.iter().any(|d| !d.is_finite()) {
        pi_covers_delta = f64::INFINITY;
    }

    let mu_covers_rows = rows.iter().fold(0.0f64, |acc, &r| acc.max(r - cert.mu));
    let recomputed_objective =
        -(instance.k() as f64) * cert.mu + cert.delta.iter().sum::<f64>();
    let objective_error = (recomputed_objective - cert.objective).abs();
    let feasible = pi_nonnegative <= FEASIBILITY_TOLERANCE
        && pi_covers_delta <= FEASIBILITY_TOLERANCE
        && mu_covers_rows <= FEASIBILITY_TOLERANCE
        && objective_error <= FEASIBILITY_TOLERANCE * recomputed_objective.abs().max(1.0);
    Ok(CertificateReport {
        pi_nonnegative,
        pi_covers_delta,
        mu_covers_rows,
        objective_error,
        recomputed_objective,
        feasible,
    })
}

/// Certificates along a first-phase run: one per iteration at
/// `(λ_t, C_{t−1})`, plus the final pair.
#[derive(Debug, Clone)]
pub struct CertificateSweep {
    pub best: DualCertificate,
    /// Objective of each visited pair, in order.
    pub objectives: Vec<f64>,
}

pub fn certificate_sweep(instance: &Instance, trace: &Phase1Trace) -> Result<CertificateSweep> {
    let params = CappedParams::for_instance(instance)?;
    let mut state = AssignmentState::new(instance);
    let mut best: Option<DualCertificate> = None;
    let mut objectives = Vec::with_capacity(trace.steps.len() + 1);
    let mut consider = |cert: DualCertificate, objectives: &mut Vec<f64>| {
        objectives.push(cert.objective);
        if best.as_ref().is_none_or(|b| cert.objective > b.objective) {
            best = Some(cert);
        }
    };
    for step in &trace.steps {
        consider(
            certificate_from_state(instance, step.lambda, &state, &params)?,
            &mut objectives,
        );
        state.add_center(instance, step.center)?;
    }
    consider(
        certificate_from_state(instance, trace.lambda, &state, &params)?,
        &mut objectives,
    );
    Ok(CertificateSweep {
        best: best.expect("at least the final pair is considered"),
        objectives,
    })
}
