//! Wall-time scaling sweeps over generated instances. Points use
//! [`gen_backbone`] so that sparse settings still admit a size-k solution.

use std::time::Instant;

use serde::Serialize;

use kmb_core::generate::gen_backbone;
use kmb_core::numeric::log_log_slope;
use kmb_core::{solve, Mode, Result};

use crate::report::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    M,
    K,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchPoint {
    pub centers: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub phase1_iterations: usize,
    /// Fastest of the repetitions.
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub sweep: Sweep,
    pub points: Vec<BenchPoint>,
    /// Log-log slope of time against the swept parameter (`m` or `k`).
    pub slope: Option<f64>,
    /// For the k sweep: slope of time against `k·ln(n/k)`.
    pub slope_k_log: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sweep: Sweep,
    pub centers: usize,
    pub n: usize,
    /// Fixed `k` for the m sweep.
    pub k: usize,
    /// Fixed edge count for the k sweep.
    pub m: usize,
    pub values: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl BenchConfig {
    pub fn defaults(sweep: Sweep) -> Self {
        let values = match sweep {
            Sweep::M => (1..=10).map(|s| 20_000 * s).collect(),
            Sweep::K => vec![5, 10, 20, 40, 80],
        };
        BenchConfig {
            sweep,
            centers: 1000,
            n: 10_000,
            k: 20,
            m: 100_000,
            values,
            reps: 3,
            seed: 1,
        }
    }
}

fn time_point(centers: usize, n: usize, m: usize, k: usize, reps: usize, seed: u64) -> Result<BenchPoint> {
    // the backbone adds n edges on top of the noise
    let density = (m.saturating_sub(n).max(1) as f64 / (centers as f64 * n as f64)).min(1.0);
    let inst = gen_backbone(centers, n, density, k, seed)?;
    let mut best = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let sol = solve(&inst, Mode::Fast)?;
        best = best.min(start.elapsed().as_secs_f64());
        iterations = sol.phase1_iterations();
    }
    Ok(BenchPoint {
        centers,
        n,
        m: inst.num_edges(),
        k,
        phase1_iterations: iterations,
        seconds: best,
    })
}

/// Points run one after another so timings do not contend.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let points = cfg
        .values
        .iter()
        .map(|&v| match cfg.sweep {
            Sweep::M => time_point(cfg.centers, cfg.n, v, cfg.k, cfg.reps, cfg.seed),
            Sweep::K => time_point(cfg.centers, cfg.n, cfg.m, v, cfg.reps, cfg.seed),
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = |x: &dyn Fn(&BenchPoint) -> f64| {
        log_log_slope(&points.iter().map(|p| (x(p), p.seconds)).collect::<Vec<_>>())
    };
    let (slope, slope_k_log) = match cfg.sweep {
        Sweep::M => (fit(&|p| p.m as f64), None),
        Sweep::K => (
            fit(&|p| p.k as f64),
            fit(&|p| p.k as f64 * (p.n as f64 / p.k as f64).ln()),
        ),
    };
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        sweep: cfg.sweep,
        points,
        slope,
        slope_k_log,
    })
}

impl BenchReport {
    pub fn human(&self) -> String {
        let mut s = String::from("centers      n        m    k  iters   seconds\n");
        for p in &self.points {
            s += &format!(
                "{:>7} {:>6} {:>8} {:>4} {:>6} {:>9.4}\n",
                p.centers, p.n, p.m, p.k, p.phase1_iterations, p.seconds
            );
        }
        let show = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.3}"));
        s += &format!("slope: {}\n", show(self.slope));
        if self.sweep == Sweep::K {
            s += &format!("slope vs k ln(n/k): {}\n", show(self.slope_k_log));
        }
        s
    }
}
