//! Streaming triangle-count estimation over edge streams.
//!
//! The crate is organised around a single per-processor streaming state
//! ([`processor::ProcessorState`]) that counts *semi-triangles*: triangles
//! whose first two edges on the stream were kept by that processor. Two
//! parallel estimators are built on top of it:
//!
//! * [`rept`] partitions the stream among processors with a shared edge
//!   hash, so processors of one group hold disjoint edge sets and the
//!   covariance between triangles sharing an edge cancels out.
//! * [`mascot`] is the baseline where every processor keeps each edge by an
//!   independent coin flip.
//!
//! [`exact`] provides ground truth (with two independent brute-force
//! cross-checks) and [`eval`] runs Monte-Carlo accuracy experiments.

pub mod cli;
pub mod error;
pub mod eval;
pub mod exact;
pub mod hash;
pub mod mascot;
pub mod processor;
pub mod report;
pub mod rept;
pub mod stream;

pub use error::{Error, Result};
pub use eval::{compare_report, monte_carlo_eval, nrmse, EvalConfig, EvalResult};
pub use exact::{brute_force_eta_pairs, exact_stream_counts, naive_triangle_count, ExactCounts};
pub use hash::HashFamily;
pub use mascot::{mascot_theoretical_variance, run_parallel_mascot, MascotConfig};
pub use processor::{PairMode, ProcessorState};
pub use report::{EstimateReport, Method};
pub use rept::{run_rept, theoretical_variance_global, ReptConfig};
pub use stream::{Edge, EdgeStream, GraphModel, IngestStats, NodeId};
