use alloc::string::String;
use core::fmt;

use crate::VertexId;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `build_snapshots` was asked for zero intervals.
    ZeroIntervals,
    /// The graph has no edges to snapshot.
    EmptyGraph,
    /// Dynamicity detection needs at least two snapshots.
    TooFewSnapshots(usize),
    /// Scoring requires `curr.index == prev.index + 1`.
    NonConsecutiveSnapshots { prev: usize, curr: usize },
    SnapshotOutOfRange { index: usize, len: usize },
    VertexOutOfRange(VertexId),
    NegativeWeight { src: VertexId, dst: VertexId, weight: f64 },
    /// Degree centrality is undefined for graphs with fewer than two vertices.
    DegenerateCentrality,
    InvalidConfig(String),
    EmptyTargets,
    /// Strict queries need a source that is highly dynamic in some snapshot.
    SourceNeverDynamic(VertexId),
    ZeroThreshold,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroIntervals => write!(f, "interval count must be at least 1"),
            Error::EmptyGraph => write!(f, "graph has no edges"),
            Error::TooFewSnapshots(n) => {
                write!(f, "dynamicity needs at least 2 snapshots, got {n}")
            }
            Error::NonConsecutiveSnapshots { prev, curr } => write!(
                f,
                "snapshots {prev} and {curr} are not consecutive"
            ),
            Error::SnapshotOutOfRange { index, len } => {
                write!(f, "snapshot index {index} out of range (have {len})")
            }
            Error::VertexOutOfRange(v) => write!(f, "vertex {v} does not exist"),
            Error::NegativeWeight { src, dst, weight } => write!(
                f,
                "negative edge weight {weight} on {src}->{dst}; shortest paths need non-negative weights"
            ),
            Error::DegenerateCentrality => {
                write!(f, "degree centrality needs at least 2 vertices")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::EmptyTargets => write!(f, "query has no target vertices"),
            Error::SourceNeverDynamic(v) => write!(
                f,
                "strict query source {v} is not a highly dynamic vertex in any snapshot"
            ),
            Error::ZeroThreshold => write!(f, "frequency threshold must be at least 1"),
        }
    }
}

impl core::error::Error for Error {}
