//! Bicriteria approximation for non-metric k-median on sparse bipartite
//! instances.
//!
//! A two-phase greedy opens at most `T + 2k` centers, where
//! `T = ⌈k·ln(n²/(2k(2k+1)))⌉`, at cost no more than the best size-`k`
//! solution. Every run also produces a feasible dual point that
//! lower-bounds the LP optimum, so each answer comes with a checkable gap.
//!
//! ```
//! use kmb_core::{solve, Instance, Mode};
//!
//! let mut edges: Vec<_> = (0..4).map(|j| (0, j, 1.0)).collect();
//! edges.extend((0..6).map(|j| (1, j, 2.0)));
//! edges.push((2, 0, 5.0));
//! let inst = Instance::new(3, 6, 2, edges).unwrap();
//! let sol = solve(&inst, Mode::Fast).unwrap();
//! assert!(sol.cost <= 8.0);
//! assert!(sol.lower_bound <= sol.cost);
//! ```

pub mod capped;
pub mod certificate;
pub mod error;
pub mod format;
pub mod generate;
pub mod instance;
pub mod numeric;
pub mod oracle;
pub mod phase_one;
pub mod phase_two;
pub mod sampling;
pub mod solver;

pub use capped::{AssignmentState, CappedParams};
pub use certificate::{build_certificate, verify_certificate, CertificateReport, DualCertificate};
pub use error::{Error, Result};
pub use instance::{normalize, Instance, NormalizedInstance, SetCoverInstance};
pub use solver::{solve, Mode, Route, Solution};
