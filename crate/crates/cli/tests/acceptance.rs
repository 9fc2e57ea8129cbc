//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kmb_cli::bench::{run_bench, BenchConfig, Sweep};
use kmb_core::capped::{best_addition, capped_cost, AssignmentState, CappedParams};
use kmb_core::certificate::{build_certificate, verify_certificate, FEASIBILITY_TOLERANCE};
use kmb_core::generate::{gen_planted, gen_uniform};
use kmb_core::instance::{from_setcover, phase_one_budget, size_ratio};
use kmb_core::oracle::{brute_force_opt, reference_lambda_step, zero_top_values, OptResult};
use kmb_core::phase_one::{lambda_step, BreakpointIndex};
use kmb_core::sampling::{miss_probability, monte_carlo, single_step_bound_check, FractionalSolution};
use kmb_core::{normalize, solve, Instance, Mode, NormalizedInstance, Route, SetCoverInstance, Solution};

const CORPUS_SIZE: usize = 540;

struct Case {
    kind: &'static str,
    inst: Instance,
    norm: NormalizedInstance,
    opt: OptResult,
    sol: Solution,
}

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn rel_le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * b.abs().max(1.0)
}

fn random_setcover(rng: &mut ChaCha8Rng, sets: usize, elements: usize, k: usize) -> SetCoverInstance {
    let mut members: Vec<Vec<usize>> = (0..sets)
        .map(|_| (0..elements).filter(|_| rng.random_bool(0.3)).collect())
        .collect();
    if rng.random_bool(0.5) {
        // plant a k-cover on the first k sets
        for e in 0..elements {
            members[e % k].push(e);
        }
    }
    for e in 0..elements {
        if !members.iter().any(|s| s.contains(&e)) {
            let s = rng.random_range(0..sets);
            members[s].push(e);
        }
    }
    for s in &mut members {
        s.sort_unstable();
        s.dedup();
    }
    SetCoverInstance {
        num_elements: elements,
        k,
        sets: members,
    }
}

/// Desk-sized instances with a finite size-k optimum, rotating through the
/// three generators. Returns the corpus and how many draws were skipped.
fn build_corpus() -> (Vec<Case>, usize) {
    let mut cases = Vec::new();
    let mut skipped = 0;
    let mut seed = 0u64;
    while cases.len() < CORPUS_SIZE {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(6..=15usize);
        let k = rng.random_range(2..=n / 3);
        let u = rng.random_range(k + 1..=8usize);
        let (kind, inst) = match seed % 3 {
            0 => ("uniform", gen_uniform(u, n, rng.random_range(0.3..=1.0), k, seed).unwrap()),
            1 => {
                let cost = if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() };
                ("planted", gen_planted(u, n, k, cost, seed).unwrap().instance)
            }
            _ => ("setcover", from_setcover(&random_setcover(&mut rng, u, n, k)).unwrap()),
        };
        let opt = brute_force_opt(&inst, k).unwrap();
        if !opt.best_cost.is_finite() {
            skipped += 1;
            continue;
        }
        let norm = normalize(&inst).unwrap();
        let sol = solve(&inst, Mode::Fast).unwrap();
        cases.push(Case {
            kind,
            inst,
            norm,
            opt,
            sol,
        });
    }
    (cases, skipped)
}

fn criterion_1(cases: &[Case], corpus_secs: f64) -> Outcome {
    let mut violations = 0;
    let mut kinds = [0usize; 3];
    for c in cases {
        let k = c.inst.k();
        let budget = phase_one_budget(k, c.inst.num_customers()).unwrap();
        if c.sol.size() > budget + 2 * k || !rel_le(c.sol.cost, c.opt.best_cost, 1e-9) {
            violations += 1;
        }
        kinds[match c.kind {
            "uniform" => 0,
            "planted" => 1,
            _ => 2,
        }] += 1;
    }
    Outcome {
        id: 1,
        pass: violations == 0 && cases.len() >= 500 && corpus_secs < 60.0,
        detail: format!(
            "bicriteria size/cost: {} instances (uniform {}, planted {}, setcover {}), {violations} violations, corpus {corpus_secs:.2}s",
            cases.len(),
            kinds[0],
            kinds[1],
            kinds[2]
        ),
    }
}

fn criterion_2(cases: &[Case]) -> Outcome {
    let violations = cases
        .iter()
        .filter(|c| {
            let lambda = c.sol.lambda.unwrap();
            !rel_le(lambda, c.opt.best_cost - c.norm.offset_total(), 1e-9)
        })
        .count();
    Outcome {
        id: 2,
        pass: violations == 0,
        detail: format!("phase-one lambda <= optimum: {violations} violations"),
    }
}

fn criterion_3(cases: &[Case]) -> Outcome {
    let mut violations = 0;
    let mut steps = 0;
    for c in cases {
        let shifted = c.norm.instance();
        let params = CappedParams::for_instance(shifted).unwrap();
        let trace = c.sol.phase1.as_ref().unwrap();
        for s in &trace.steps {
            steps += 1;
            if s.capped_after > params.invariant_bound(s.t) + 1e-9 {
                violations += 1;
            }
        }
        if trace.iterations() > trace.budget
            || c.sol.phase2_additions() > 2 * c.inst.k()
            || c.sol.normalized_cost.unwrap() > c.sol.lambda.unwrap()
        {
            violations += 1;
        }
    }
    Outcome {
        id: 3,
        pass: violations == 0,
        detail: format!("trace invariants over {steps} iterations: {violations} violations"),
    }
}

fn criterion_4(cases: &[Case]) -> Outcome {
    let mut compared = 0;
    let mut worst = 0.0f64;
    let mut violations = 0;
    for c in cases {
        let shifted = c.norm.instance();
        let params = CappedParams::for_instance(shifted).unwrap();
        let index = BreakpointIndex::build(shifted, &params);
        let mut state = AssignmentState::new(shifted);
        for s in &c.sol.phase1.as_ref().unwrap().steps {
            let tau = s.tau.unwrap();
            let (fast, _) = lambda_step(&state, shifted, s.lambda_prev, tau, &index, &params).unwrap();
            let (slow, _) = reference_lambda_step(&state, shifted, s.lambda_prev, tau, &params);
            compared += 1;
            if fast != slow {
                let err = (fast - slow).abs() / slow.abs().max(1.0);
                worst = worst.max(err);
                // NaN counts as a violation
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                let bad = !(err <= 1e-9);
                if bad {
                    violations += 1;
                }
            }
            state.add_center(shifted, s.center).unwrap();
        }
    }
    Outcome {
        id: 4,
        pass: violations == 0,
        detail: format!(
            "fast vs reference lambda step: {compared} steps, worst relative error {worst:.2e}, {violations} violations"
        ),
    }
}

fn criterion_5(cases: &[Case]) -> Outcome {
    let mut checked = 0;
    let mut worst_residual = 0.0f64;
    let mut infeasible = 0;
    let mut above_opt = 0;
    let mut identity = 0;
    let mut experimental = 0;
    for c in cases {
        let shifted = c.norm.instance();
        let params = CappedParams::for_instance(shifted).unwrap();
        let trace = c.sol.phase1.as_ref().unwrap();
        let mut state = AssignmentState::new(shifted);
        let mut points: Vec<(f64, AssignmentState)> = Vec::new();
        for s in &trace.steps {
            points.push((s.lambda, state.clone()));
            state.add_center(shifted, s.center).unwrap();
        }
        points.push((trace.lambda, state));
        for (lambda, st) in &points {
            let cert = build_certificate(shifted, *lambda, st.chosen()).unwrap();
            let report = verify_certificate(&cert, shifted).unwrap();
            checked += 1;
            worst_residual = worst_residual
                .max(report.pi_nonnegative)
                .max(report.pi_covers_delta)
                .max(report.mu_covers_rows);
            if !report.feasible {
                infeasible += 1;
            }
            if cert.objective > c.opt.best_cost - c.norm.offset_total() + 1e-9 {
                above_opt += 1;
            }
            if !cert.degenerate {
                let current = capped_cost(st, *lambda, &params);
                let (_, best) = best_addition(st, shifted, *lambda, &params);
                let expected =
                    lambda / params.shrink * (current - params.k as f64 * (current - best));
                if (cert.objective - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                    identity += 1;
                }
            }
        }
        // the reported bound lives on the original scale
        let cert = c.sol.certificate.as_ref().unwrap();
        let report = verify_certificate(cert, &c.inst).unwrap();
        if !report.feasible {
            infeasible += 1;
        }
        if cert.objective > c.opt.best_cost + 1e-9 {
            above_opt += 1;
        }
        let max_dual = c.sol.dual_objectives.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if c.sol.normalized_cost.unwrap() > max_dual + 1e-9 {
            experimental += 1;
        }
    }
    Outcome {
        id: 5,
        pass: infeasible == 0 && above_opt == 0 && identity == 0 && worst_residual <= FEASIBILITY_TOLERANCE,
        detail: format!(
            "dual certificates: {checked} checked, worst residual {worst_residual:.2e}, {infeasible} infeasible, {above_opt} above optimum, {identity} identity mismatches; experimental primal <= max dual: {experimental} violations"
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut checked = 0u64;
    let mut violations = 0;
    for k in 2..=50usize {
        for n in 3 * k..=10_000 {
            let alpha = size_ratio(k, n).unwrap();
            let (kf, nf) = (k as f64, n as f64);
            let log = (nf / kf).ln();
            let middle = 2.0 * log + 2.0 - 2.0 * std::f64::consts::LN_2 + 1.0 / (2.0 * kf)
                + 1.0 / (4.0 * kf * kf);
            checked += 1;
            if !(alpha < middle && middle < 1.0 + 2.0 * log) {
                violations += 1;
            }
        }
    }
    Outcome {
        id: 6,
        pass: violations == 0,
        detail: format!("alpha < 1 + 2 ln(n/k): {checked} (k, n) pairs, {violations} violations"),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let trials = 100_000;
    for _ in 0..trials {
        let n = rng.random_range(3..=64usize);
        let k = rng.random_range(1..=(n - 1) / 2);
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
        let total: f64 = raw.iter().sum();
        let target = rng.random::<f64>();
        let b: Vec<f64> = raw.iter().map(|x| x / total * target).collect();
        if b.iter().sum::<f64>() >= 1.0 {
            continue;
        }
        let z = zero_top_values(&b, 2 * k);
        let max = z.iter().cloned().fold(0.0, f64::max);
        let sum: f64 = z.iter().sum();
        if !(max < 1.0 / (2 * k + 1) as f64 && sum < 1.0 - 2.0 * k as f64 / n as f64) {
            violations += 1;
        }
    }
    Outcome {
        id: 7,
        pass: violations == 0,
        detail: format!("top-value averaging: {trials} vectors, {violations} violations"),
    }
}

fn criterion_8(cases: &[Case]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 10_000;
    let mut violations = 0;
    for t in 0..trials {
        let c = &cases[t % cases.len()];
        let shifted = c.norm.instance();
        let u = shifted.num_centers();
        let centers: Vec<usize> = (0..u).filter(|_| rng.random_bool(0.3)).collect();
        let scale = (c.opt.best_cost - c.norm.offset_total()).max(0.1);
        let lambda = scale * rng.random_range(0.05..3.0);
        let report = single_step_bound_check(shifted, lambda, &centers, &c.opt.best_set).unwrap();
        if !report.holds {
            violations += 1;
        }
    }
    Outcome {
        id: 8,
        pass: violations == 0,
        detail: format!("single-step bound: {trials} (instance, lambda, C) triples, {violations} violations"),
    }
}

fn criterion_9() -> Outcome {
    let mut worked_edges: Vec<_> = (0..4).map(|j| (0, j, 1.0)).collect();
    worked_edges.extend((0..6).map(|j| (1, j, 2.0)));
    let worked = Instance::new(2, 6, 2, worked_edges).unwrap();
    let mut inputs = vec![(worked, vec![0, 1])];
    for (seed, (u, n, k)) in [(10, 30, 3), (12, 40, 4), (8, 24, 2), (15, 60, 5)].into_iter().enumerate() {
        let p = gen_planted(u, n, k, 0.4, seed as u64 + 1).unwrap();
        inputs.push((p.instance, p.planted));
    }
    let mut failures = Vec::new();
    for (idx, (inst, centers)) in inputs.iter().enumerate() {
        let k = inst.k();
        let n = inst.num_customers();
        let rounds = phase_one_budget(k, n).unwrap();
        let frac = FractionalSolution::integral(inst, centers).unwrap();
        let s = monte_carlo(&frac, inst, rounds, 10_000, 90 + idx as u64).unwrap();
        let expected = n as f64 * miss_probability(k, rounds);
        let freq = s.bad_event_frequency.unwrap();
        let ok = s.mean_cost <= s.fractional_cost + 4.0 * s.se_cost + 1e-12
            && (s.mean_unassigned - expected).abs() <= 4.0 * s.se_unassigned + 1e-12
            && freq < 1.0
            && freq <= s.bad_event_bound.unwrap() + 4.0 * s.se_bad_event.unwrap();
        if !ok {
            failures.push(format!(
                "input {idx}: cost {:.4}/{:.4}, unassigned {:.4}/{expected:.4}, bad {freq:.4}/{:.4}",
                s.mean_cost,
                s.fractional_cost,
                s.mean_unassigned,
                s.bad_event_bound.unwrap()
            ));
        }
    }
    Outcome {
        id: 9,
        pass: failures.is_empty(),
        detail: format!(
            "sampling bounds: {} inputs x 10000 trials at rounds = T{}{}",
            inputs.len(),
            if failures.is_empty() { "" } else { "; " },
            failures.join("; ")
        ),
    }
}

fn criterion_10() -> Outcome {
    let inst = gen_uniform(500, 20_000, 0.02, 50, 10).unwrap();
    let start = Instant::now();
    let sol = solve(&inst, Mode::Fast).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut m_cfg = BenchConfig::defaults(Sweep::M);
    m_cfg.reps = 2;
    let mut k_cfg = BenchConfig::defaults(Sweep::K);
    k_cfg.reps = 2;
    let m_slope = run_bench(&m_cfg).unwrap().slope.unwrap();
    let k_report = run_bench(&k_cfg).unwrap();
    let k_slope = k_report.slope.unwrap();
    Outcome {
        id: 10,
        pass: secs < 10.0 && m_slope <= 1.3 && k_slope <= 1.3 && sol.route == Route::TwoPhase,
        detail: format!(
            "performance: m={} n=20000 k=50 solved in {secs:.2}s (size {}), m-sweep slope {m_slope:.3}, k-sweep slope {k_slope:.3} (vs k ln(n/k): {:.3})",
            inst.num_edges(),
            sol.size(),
            k_report.slope_k_log.unwrap()
        ),
    }
}

fn main() {
    let start = Instant::now();
    let (cases, skipped) = build_corpus();
    let corpus_secs = start.elapsed().as_secs_f64();
    println!(
        "corpus: {} instances with finite optimum ({skipped} infeasible draws skipped)",
        cases.len()
    );

    let outcomes = [
        criterion_1(&cases, corpus_secs),
        criterion_2(&cases),
        criterion_3(&cases),
        criterion_4(&cases),
        criterion_5(&cases),
        criterion_6(),
        criterion_7(),
        criterion_8(&cases),
        criterion_9(),
        criterion_10(),
    ];
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "{} criterion {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        outcomes.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
