//! `kmb` command-line front end.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 infeasible input,
//! 3 fixed-λ budget exhausted, 4 certificate check failed.

pub mod bench;
pub mod report;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kmb_core::certificate::{build_certificate, verify_certificate};
use kmb_core::format::{self, Format};
use kmb_core::generate::{gen_planted, gen_uniform};
use kmb_core::instance::{from_setcover, stats, to_setcover};
use kmb_core::oracle::brute_force_opt;
use kmb_core::sampling::{check_feasible, monte_carlo};
use kmb_core::{solve, Error, Instance, Mode};

use bench::{run_bench, BenchConfig, Sweep};
use report::{CertificateDoc, RunReport, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "kmb", version, about = "Bicriteria k-median solver with dual certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fast,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetFormat {
    Kmedian,
    Setcover,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "fast")]
        mode: ModeArg,
        /// Target cost for `--mode fixed`, on the file's cost scale.
        #[arg(long)]
        lambda: Option<f64>,
        /// Include the per-iteration trace.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Build, or check, a dual lower-bound certificate.
    Certify {
        path: PathBuf,
        #[arg(long, requires = "centers", conflicts_with_all = ["from_solve", "check"])]
        lambda: Option<f64>,
        /// Comma-separated 1-based center ids.
        #[arg(long, value_delimiter = ',', requires = "lambda")]
        centers: Vec<usize>,
        /// Use the best certificate found by a fast solve.
        #[arg(long, conflicts_with = "check")]
        from_solve: bool,
        /// Verify a certificate document written by `certify --json`.
        #[arg(long)]
        check: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo run of the sampling rounding scheme.
    Simulate {
        path: PathBuf,
        frac: PathBuf,
        /// Defaults to the phase-one budget T.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Convert between the k-median and set cover formats; `-` reads stdin.
    Convert {
        path: PathBuf,
        #[arg(long, value_enum)]
        to: TargetFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Exact optimum by enumeration (small instances only).
    Oracle {
        path: PathBuf,
        /// Overrides the instance's k.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Time fast solves over a sweep of `m` or `k` and fit a log-log slope.
    Bench {
        #[arg(long, value_enum)]
        sweep: Sweep,
        /// Swept values; defaults depend on the sweep.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
        #[arg(long)]
        centers: Option<usize>,
        #[arg(long)]
        customers: Option<usize>,
        /// Fixed k for the m sweep.
        #[arg(long)]
        k: Option<usize>,
        /// Fixed edge count for the k sweep.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Each customer links to a Binomial(|U|, density) number of centers.
    Uniform {
        #[arg(long)]
        centers: usize,
        #[arg(long)]
        customers: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hidden k-center solution with per-edge cost `--cost`.
    Planted {
        #[arg(long)]
        centers: usize,
        #[arg(long)]
        customers: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        cost: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IsolatedCustomer(_)
            | Error::UncoverableElement(_)
            | Error::Infeasible(_)
            | Error::InfeasibleFractional(_) => 2,
            Error::BudgetExhausted { .. } => 3,
            _ => 1,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(1, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(1, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Applies `KMB_THREADS` to the global rayon pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var("KMB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::new(1, format!("{}: {e}", path.display())))
    }
}

/// Reads a k-median file; set cover files are converted on the fly.
pub fn load_instance(path: &Path) -> CliResult<Instance> {
    let text = read_text(path)?;
    match format::detect(&text) {
        Some(Format::SetCover) => Ok(from_setcover(&format::parse_setcover(&text)?)?),
        _ => Ok(format::parse_kmedian(&text)?),
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, doc: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)?;
    Ok(())
}

fn write_or_print(out: &mut dyn Write, output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::new(1, format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn to_zero_based(ids: &[usize], limit: usize) -> CliResult<Vec<usize>> {
    ids.iter()
        .map(|&i| {
            if i == 0 || i > limit {
                Err(CliError::new(1, format!("center id {i} out of range 1..={limit}")))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct OracleDoc {
    schema_version: u32,
    k: usize,
    best_cost: Option<f64>,
    best_set: Vec<usize>,
    enumerated_count: u64,
}

#[derive(Debug, Serialize)]
struct SimulateDoc {
    schema_version: u32,
    #[serde(flatten)]
    stats: kmb_core::sampling::MonteCarloStats,
    cost_within_bound: bool,
    unassigned_matches: bool,
    bad_event_within_bound: Option<bool>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Solve {
            path,
            mode,
            lambda,
            trace,
            json,
        } => {
            let inst = load_instance(&path)?;
            let (mode, label) = match (mode, lambda) {
                (ModeArg::Fast, _) => (Mode::Fast, "fast"),
                (ModeArg::Fixed, Some(l)) => (Mode::FixedLambda(l), "fixed"),
                (ModeArg::Fixed, None) => {
                    return Err(CliError::new(1, "--mode fixed requires --lambda"))
                }
            };
            let start = Instant::now();
            let sol = solve(&inst, mode)?;
            let report = RunReport::new(&inst, label, &sol, start.elapsed().as_secs_f64(), trace);
            if json {
                emit_json(out, &report)
            } else {
                Ok(write!(out, "{}", report.human())?)
            }
        }
        Command::Certify {
            path,
            lambda,
            centers,
            from_solve,
            check,
            json,
        } => {
            let inst = load_instance(&path)?;
            let cert = if let Some(file) = check {
                let doc: CertificateDoc = serde_json::from_str(&read_text(&file)?)?;
                doc.to_certificate()
                    .ok_or_else(|| CliError::new(1, "certificate ids are 1-based"))?
            } else if from_solve {
                let sol = solve(&inst, Mode::Fast)?;
                sol.certificate.ok_or_else(|| {
                    CliError::new(
                        1,
                        format!(
                            "solved exactly (route {:?}, cost {}); certificates need 2 <= k <= n/3",
                            sol.route, sol.cost
                        ),
                    )
                })?
            } else {
                let lambda = lambda.ok_or_else(|| {
                    CliError::new(1, "give --lambda with --centers, --from-solve, or --check")
                })?;
                let ids = to_zero_based(&centers, inst.num_centers())?;
                build_certificate(&inst, lambda, &ids)?
            };
            if cert.degenerate {
                eprintln!("warning: lambda is 0 or infinite; certificate is the trivial zero point");
            }
            let report = verify_certificate(&cert, &inst)?;
            let doc = CertificateDoc::new(&cert, Some(&report));
            if json {
                emit_json(out, &doc)?;
            } else {
                write!(out, "{}", doc.human())?;
            }
            if report.feasible {
                Ok(())
            } else {
                Err(CliError::new(4, "certificate check failed"))
            }
        }
        Command::Simulate {
            path,
            frac,
            rounds,
            trials,
            seed,
            json,
        } => {
            let inst = load_instance(&path)?;
            let (u, n, solution) = format::parse_frac(&read_text(&frac)?)?;
            if u != inst.num_centers() || n != inst.num_customers() {
                return Err(CliError::new(
                    1,
                    format!(
                        "fractional solution is {u}x{n}, instance is {}x{}",
                        inst.num_centers(),
                        inst.num_customers()
                    ),
                ));
            }
            let feasible = check_feasible(&solution, &inst)?;
            if !feasible.feasible {
                return Err(Error::InfeasibleFractional(format!("{feasible:?}")).into());
            }
            let rounds = match rounds {
                Some(r) => r,
                None => stats(&inst).budget()?,
            };
            let s = monte_carlo(&solution, &inst, rounds, trials, seed)?;
            let doc = SimulateDoc {
                schema_version: SCHEMA_VERSION,
                cost_within_bound: s.mean_cost <= s.fractional_cost + 4.0 * s.se_cost + 1e-9,
                unassigned_matches: (s.mean_unassigned - s.expected_unassigned).abs()
                    <= 4.0 * s.se_unassigned + 1e-9,
                bad_event_within_bound: match (s.bad_event_frequency, s.se_bad_event, s.bad_event_bound) {
                    (Some(f), Some(se), Some(b)) => Some(f <= b + 4.0 * se),
                    _ => None,
                },
                stats: s,
            };
            if json {
                emit_json(out, &doc)
            } else {
                let s = &doc.stats;
                let opt = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.6}"));
                write!(
                    out,
                    "trials: {}\nrounds: {}\nfractional_cost: {:.6}\nmean_cost: {:.6} (se {:.6})\n\
                     mean_unassigned: {:.4} (se {:.4}, expected {:.4})\n\
                     bad_event_frequency: {} (se {}, bound {})\n\
                     cost_within_bound: {}\nunassigned_matches: {}\nbad_event_within_bound: {}\n",
                    s.trials,
                    s.rounds,
                    s.fractional_cost,
                    s.mean_cost,
                    s.se_cost,
                    s.mean_unassigned,
                    s.se_unassigned,
                    s.expected_unassigned,
                    opt(s.bad_event_frequency),
                    opt(s.se_bad_event),
                    opt(s.bad_event_bound),
                    doc.cost_within_bound,
                    doc.unassigned_matches,
                    doc.bad_event_within_bound
                        .map_or("-".to_owned(), |b| b.to_string()),
                )?;
                Ok(())
            }
        }
        Command::Convert { path, to, output } => {
            let text = read_text(&path)?;
            let converted = match (format::detect(&text), to) {
                (Some(Format::SetCover), TargetFormat::Kmedian) => {
                    format::write_kmedian(&from_setcover(&format::parse_setcover(&text)?)?)
                }
                (Some(Format::SetCover), TargetFormat::Setcover) => {
                    format::write_setcover(&format::parse_setcover(&text)?)
                }
                (_, TargetFormat::Kmedian) => format::write_kmedian(&format::parse_kmedian(&text)?),
                (_, TargetFormat::Setcover) => {
                    format::write_setcover(&to_setcover(&format::parse_kmedian(&text)?)?)
                }
            };
            write_or_print(out, output.as_deref(), &converted)
        }
        Command::Gen { kind } => {
            let (inst, output) = match kind {
                GenKind::Uniform {
                    centers,
                    customers,
                    density,
                    k,
                    seed,
                    output,
                } => (gen_uniform(centers, customers, density, k, seed)?, output),
                GenKind::Planted {
                    centers,
                    customers,
                    k,
                    cost,
                    seed,
                    output,
                } => (gen_planted(centers, customers, k, cost, seed)?.instance, output),
            };
            write_or_print(out, output.as_deref(), &format::write_kmedian(&inst))
        }
        Command::Oracle { path, k, json } => {
            let inst = load_instance(&path)?;
            let k = k.unwrap_or(inst.k());
            let r = brute_force_opt(&inst, k)?;
            let doc = OracleDoc {
                schema_version: SCHEMA_VERSION,
                k,
                best_cost: r.best_cost.is_finite().then_some(r.best_cost),
                best_set: r.best_set.iter().map(|&i| i + 1).collect(),
                enumerated_count: r.enumerated_count,
            };
            if json {
                emit_json(out, &doc)
            } else {
                writeln!(
                    out,
                    "best_cost: {}\nbest_set: {:?}\nenumerated: {}",
                    doc.best_cost.map_or("inf".to_owned(), |c| format!("{c:.9}")),
                    doc.best_set,
                    doc.enumerated_count
                )?;
                Ok(())
            }
        }
        Command::Bench {
            sweep,
            values,
            centers,
            customers,
            k,
            m,
            reps,
            seed,
            json,
        } => {
            let mut cfg = BenchConfig::defaults(sweep);
            if !values.is_empty() {
                cfg.values = values;
            }
            cfg.centers = centers.unwrap_or(cfg.centers);
            cfg.n = customers.unwrap_or(cfg.n);
            cfg.k = k.unwrap_or(cfg.k);
            cfg.m = m.unwrap_or(cfg.m);
            cfg.reps = reps;
            cfg.seed = seed;
            let report = run_bench(&cfg)?;
            if json {
                emit_json(out, &report)
            } else {
                Ok(write!(out, "{}", report.human())?)
            }
        }
    }
}
