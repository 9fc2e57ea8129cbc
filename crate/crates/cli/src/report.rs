//! Structured output documents. Every document carries `schema_version`;
//! ids are 1-based, as in the input files.

use serde::{Deserialize, Serialize};

use kmb_core::certificate::{CertificateReport, DualCertificate, PiEntry};
use kmb_core::instance::{stats, Instance};
use kmb_core::phase_one::Phase1Step;
use kmb_core::phase_two::PolishStep;
use kmb_core::Solution;

pub const SCHEMA_VERSION: u32 = 1;

fn one_based(ids: &[usize]) -> Vec<usize> {
    ids.iter().map(|&i| i + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Digest {
    pub centers: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub max_degree: usize,
    /// `None` outside `2 ≤ k ≤ n/3`.
    pub budget: Option<usize>,
    pub alpha: Option<f64>,
}

impl Digest {
    pub fn of(instance: &Instance) -> Self {
        let s = stats(instance);
        Digest {
            centers: instance.num_centers(),
            n: s.n,
            m: s.m,
            k: s.k,
            max_degree: s.max_degree,
            budget: s.budget,
            alpha: s.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub phase1: Vec<Phase1Row>,
    pub polish: Vec<PolishRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Row {
    pub t: usize,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub center: usize,
    pub capped_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolishRow {
    pub customer: usize,
    pub center: usize,
    pub cost_after: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Phase1Row {
    fn of(step: &Phase1Step) -> Self {
        Phase1Row {
            t: step.t,
            lambda: finite(step.lambda),
            tau: step.tau,
            center: step.center + 1,
            capped_after: step.capped_after,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub instance: Digest,
    pub mode: String,
    pub route: String,
    pub centers: Vec<usize>,
    pub size: usize,
    pub size_bound: usize,
    pub cost: f64,
    pub lower_bound: f64,
    pub gap: f64,
    /// Phase-one λ on the normalized scale.
    pub lambda: Option<f64>,
    pub phase1_iterations: usize,
    pub phase2_additions: usize,
    pub wall_seconds: f64,
    pub trace: Option<TraceDoc>,
}

impl RunReport {
    pub fn new(instance: &Instance, mode: &str, sol: &Solution, wall_seconds: f64, trace: bool) -> Self {
        let route = serde_json::to_value(sol.route)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let trace = trace.then(|| TraceDoc {
            phase1: sol
                .phase1
                .as_ref()
                .map(|t| t.steps.iter().map(Phase1Row::of).collect())
                .unwrap_or_default(),
            polish: sol
                .polish
                .as_ref()
                .map(|p| p.steps.iter().map(polish_row).collect())
                .unwrap_or_default(),
        });
        RunReport {
            schema_version: SCHEMA_VERSION,
            instance: Digest::of(instance),
            mode: mode.to_owned(),
            route,
            centers: one_based(&sol.centers),
            size: sol.size(),
            size_bound: sol.size_bound,
            cost: sol.cost,
            lower_bound: sol.lower_bound,
            gap: sol.gap(),
            lambda: sol.lambda.and_then(finite),
            phase1_iterations: sol.phase1_iterations(),
            phase2_additions: sol.phase2_additions(),
            wall_seconds,
            trace,
        }
    }

    pub fn human(&self) -> String {
        let d = &self.instance;
        let opt = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.6}"));
        let mut s = format!(
            "instance: |U|={} n={} m={} k={} max_degree={} T={} alpha={}\n",
            d.centers,
            d.n,
            d.m,
            d.k,
            d.max_degree,
            d.budget.map_or("-".to_owned(), |t| t.to_string()),
            opt(d.alpha),
        );
        s += &format!("mode: {} (route {})\n", self.mode, self.route);
        s += &format!("size: {} (bound {})\n", self.size, self.size_bound);
        s += &format!(
            "cost: {:.9}\nlower_bound: {:.9}\ngap: {:.9}\n",
            self.cost, self.lower_bound, self.gap
        );
        s += &format!(
            "lambda: {}\niterations: phase1 {} polish {}\nwall: {:.3}s\n",
            opt(self.lambda),
            self.phase1_iterations,
            self.phase2_additions,
            self.wall_seconds
        );
        s += &format!(
            "centers: {}\n",
            self.centers
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        if let Some(trace) = &self.trace {
            for r in &trace.phase1 {
                s += &format!(
                    "  phase1 t={} lambda={} center={} capped={:.6}\n",
                    r.t,
                    opt(r.lambda),
                    r.center,
                    r.capped_after
                );
            }
            for r in &trace.polish {
                s += &format!(
                    "  polish customer={} center={} cost={}\n",
                    r.customer,
                    r.center,
                    opt(r.cost_after)
                );
            }
        }
        s
    }
}

fn polish_row(step: &PolishStep) -> PolishRow {
    PolishRow {
        customer: step.customer + 1,
        center: step.center + 1,
        cost_after: finite(step.true_cost_after),
    }
}

/// On-disk form of a dual certificate, accepted back by `certify --check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub schema_version: u32,
    /// `null` for λ = ∞.
    pub lambda: Option<f64>,
    pub centers: Vec<usize>,
    pub delta: Vec<f64>,
    /// `[center, customer, value]` triples, positive entries only.
    pub pi: Vec<(usize, usize, f64)>,
    pub mu: f64,
    pub objective: f64,
    pub degenerate: bool,
    #[serde(default)]
    pub verification: Option<VerificationDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationDoc {
    pub pi_nonnegative: f64,
    pub pi_covers_delta: f64,
    pub mu_covers_rows: f64,
    pub objective_error: f64,
    pub recomputed_objective: f64,
    pub feasible: bool,
}

impl From<&CertificateReport> for VerificationDoc {
    fn from(r: &CertificateReport) -> Self {
        VerificationDoc {
            pi_nonnegative: r.pi_nonnegative,
            pi_covers_delta: r.pi_covers_delta,
            mu_covers_rows: r.mu_covers_rows,
            objective_error: r.objective_error,
            recomputed_objective: r.recomputed_objective,
            feasible: r.feasible,
        }
    }
}

impl CertificateDoc {
    pub fn new(cert: &DualCertificate, report: Option<&CertificateReport>) -> Self {
        CertificateDoc {
            schema_version: SCHEMA_VERSION,
            lambda: finite(cert.lambda),
            centers: one_based(&cert.centers),
            delta: cert.delta.clone(),
            pi: cert
                .pi
                .iter()
                .map(|e| (e.center + 1, e.customer + 1, e.value))
                .collect(),
            mu: cert.mu,
            objective: cert.objective,
            degenerate: cert.degenerate,
            verification: report.map(VerificationDoc::from),
        }
    }

    /// Back to 0-based ids; `None` if any id is 0.
    pub fn to_certificate(&self) -> Option<DualCertificate> {
        let back = |i: usize| i.checked_sub(1);
        Some(DualCertificate {
            lambda: self.lambda.unwrap_or(f64::INFINITY),
            centers: self.centers.iter().map(|&i| back(i)).collect::<Option<_>>()?,
            delta: self.delta.clone(),
            pi: self
                .pi
                .iter()
                .map(|&(i, j, value)| {
                    Some(PiEntry {
                        center: back(i)?,
                        customer: back(j)?,
                        value,
                    })
                })
                .collect::<Option<_>>()?,
            mu: self.mu,
            objective: self.objective,
            degenerate: self.degenerate,
        })
    }

    pub fn human(&self) -> String {
        let mut s = format!(
            "lambda: {}\ncenters: {:?}\nmu: {:.9}\nobjective: {:.9}\ndegenerate: {}\n",
            self.lambda.map_or("inf".to_owned(), |l| format!("{l:.9}")),
            self.centers,
            self.mu,
            self.objective,
            self.degenerate
        );
        s += &format!(
            "delta: {}\n",
            self.delta
                .iter()
                .map(|d| format!("{d:.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
        if let Some(v) = &self.verification {
            s += &format!(
                "residuals: pi_nonnegative={:.3e} pi_covers_delta={:.3e} mu_covers_rows={:.3e} objective_error={:.3e}\nfeasible: {}\n",
                v.pi_nonnegative, v.pi_covers_delta, v.mu_covers_rows, v.objective_error, v.feasible
            );
        }
        s
    }
}
