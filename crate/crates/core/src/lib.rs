//! Allocation-only algorithms for tracking pathways through highly dynamic
//! vertices in temporal graphs.
//!
//! The crate is `no_std` and performs no IO. Parsing, JSON export, worker
//! pools and the HTTP service live in the `chronopath` companion crate.
//!
//! Pipeline, in order:
//!
//! 1. [`graph::TemporalGraph`] holds the timestamped edge multiset.
//! 2. [`snapshot::build_snapshots`] materializes cumulative snapshots
//!    `S_0..S_n`; an edge belongs to `S_i` iff `t_end <= t_i`.
//! 3. [`dynamicity::detect_hdv`] scores per-vertex change between
//!    consecutive snapshots and thresholds it into highly dynamic vertex sets.
//! 4. [`kcore::significant_subgraph`] keeps the largest k-core that still
//!    contains every highly dynamic vertex of a snapshot.
//! 5. [`chronopath::find_chronopath`] and
//!    [`chronopath::find_relaxed_chronopath`] stitch per-snapshot shortest
//!    paths into cross-snapshot paths.
//! 6. [`patterns::extract_frequent_edges`] summarizes the returned paths.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod chronopath;
pub mod dynamicity;
mod error;
pub mod graph;
pub mod kcore;
pub mod metrics;
pub mod patterns;
pub mod snapshot;
pub mod sssp;

pub use error::Error;

/// Dense internal vertex id, `0..vertex_count`.
pub type VertexId = u32;

/// Integer epoch units.
pub type Timestamp = i64;

pub type Result<T> = core::result::Result<T, Error>;
