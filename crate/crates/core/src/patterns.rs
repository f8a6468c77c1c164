//! Frequent-edge summaries of a chronopath set.
//!
//! Each edge is counted once per path containing it. Edges that reach the
//! threshold become patterns; a pattern's subgraph is the union of every
//! path that contains its edge.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chronopath::Chronopath;
use crate::{Error, Result, VertexId};

/// `(src, dst, snapshot)`. In snapshot-agnostic mode `snapshot` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub snapshot: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternOptions {
    /// Merge the same vertex pair across snapshots.
    pub snapshot_agnostic: bool,
    /// Require `frequency > threshold` instead of `>=`.
    pub strictly_greater: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSubgraph {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<PatternEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequentEdgePattern {
    pub edge: PatternEdge,
    pub frequency: usize,
    /// Indices into the input path list, ascending.
    pub member_paths: Vec<usize>,
    pub subgraph: PatternSubgraph,
}

fn path_edges(path: &Chronopath, options: PatternOptions) -> BTreeSet<PatternEdge> {
    path.edges()
        .map(|(src, dst, snapshot)| PatternEdge {
            src,
            dst,
            snapshot: (!options.snapshot_agnostic).then_some(snapshot),
        })
        .collect()
}

/// Sorted by frequency (desc), then edge (asc). An empty path list yields
/// no patterns.
pub fn extract_frequent_edges(
    paths: &[Chronopath],
    threshold: usize,
    options: PatternOptions,
) -> Result<Vec<FrequentEdgePattern>> {
    if threshold == 0 {
        return Err(Error::ZeroThreshold);
    }
    let edge_sets: Vec<BTreeSet<PatternEdge>> = paths.iter().map(|p| path_edges(p, options)).collect();
    let mut members: BTreeMap<PatternEdge, Vec<usize>> = BTreeMap::new();
    for (i, edges) in edge_sets.iter().enumerate() {
        for e in edges {
            members.entry(*e).or_default().push(i);
        }
    }

    let qualifies = |f: usize| if options.strictly_greater { f > threshold } else { f >= threshold };
    let mut patterns: Vec<FrequentEdgePattern> = members
        .into_iter()
        .filter(|(_, m)| qualifies(m.len()))
        .map(|(edge, member_paths)| {
            let mut vertices = BTreeSet::new();
            let mut edges = BTreeSet::new();
            for &i in &member_paths {
                vertices.extend(paths[i].vertex_sequence());
                edges.extend(edge_sets[i].iter().copied());
            }
            FrequentEdgePattern {
                edge,
                frequency: member_paths.len(),
                member_paths,
                subgraph: PatternSubgraph { vertices: vertices.into_iter().collect(), edges: edges.into_iter().collect() },
            }
        })
        .collect();
    patterns.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.edge.cmp(&b.edge)));
    Ok(patterns)
}
