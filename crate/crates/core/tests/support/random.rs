//! Seeded generators for oracle and property tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use chronopath_core::chronopath::{Chronopath, PathSegment, SegmentScope};
use chronopath_core::graph::{TemporalEdge, TemporalGraph};
use chronopath_core::snapshot::{Snapshot, SnapshotSequence};
use rand::Rng;

/// Directed graph with 2..=max_n vertices, integer weights in 1..=10 and
/// occasional parallel edges.
pub fn weighted_digraph(rng: &mut impl Rng, max_n: usize) -> (usize, Vec<(u32, u32, f64)>) {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(0..=3 * n);
    let edges = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            (a, b, rng.gen_range(1..=10) as f64)
        })
        .collect();
    (n, edges)
}

/// Undirected edge pairs with varying density so that deep cores appear.
pub fn undirected_pairs(rng: &mut impl Rng, max_n: usize) -> (usize, Vec<(u32, u32)>) {
    let n = rng.gen_range(1..=max_n);
    let p: f64 = rng.gen_range(0.0..0.3);
    let mut pairs = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.gen_bool(p) {
                pairs.push((a, b));
            }
        }
    }
    (n, pairs)
}

pub struct TemporalInstance {
    pub graph: TemporalGraph,
    pub seq: SnapshotSequence,
    /// Random per-snapshot dynamic sets, for every snapshot index.
    pub hdv: Vec<(usize, Vec<u32>)>,
}

/// Temporal graph whose snapshot `i` has boundary `i`, with random dynamic
/// sets. Half the instances are undirected.
pub fn temporal_instance(rng: &mut impl Rng, max_n: usize, max_snapshots: usize) -> TemporalInstance {
    let n = rng.gen_range(3..=max_n);
    let layers = rng.gen_range(1..=max_snapshots);
    let m = rng.gen_range(n..=4 * n);
    let directed = rng.gen_bool(0.5);
    let edges = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            let t = rng.gen_range(0..layers as i64);
            TemporalEdge::instant(a, b, t, rng.gen_range(1..=10) as f64)
        })
        .collect();
    let graph = TemporalGraph::with_numeric_labels(n, edges, directed);
    let seq = SnapshotSequence::from_snapshots((0..layers).map(|i| Snapshot::build(&graph, i, i as i64)).collect());
    let density: f64 = rng.gen_range(0.3..0.9);
    let hdv = (0..layers)
        .map(|i| (i, (0..n as u32).filter(|_| rng.gen_bool(density)).collect()))
        .collect();
    TemporalInstance { graph, seq, hdv }
}

/// 0..12 unit-weight paths over a small vertex pool so edges repeat often.
pub fn path_set(rng: &mut impl Rng) -> Vec<Chronopath> {
    let count = rng.gen_range(0..12);
    (0..count)
        .map(|_| {
            let mut snapshot = rng.gen_range(0..3);
            let mut at = rng.gen_range(0..6u32);
            let mut segments = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let mut vertices = vec![at];
                for _ in 0..rng.gen_range(0..5) {
                    at = rng.gen_range(0..6);
                    vertices.push(at);
                }
                let weights = vec![1.0; vertices.len() - 1];
                let length = weights.len() as f64;
                segments.push(PathSegment { snapshot, vertices, weights, length, scope: SegmentScope::FullSnapshot });
                snapshot += 1;
            }
            let total_length = segments.iter().map(|s| s.length).sum();
            Chronopath { segments, total_length, hdv_fraction: 1.0, significance: 0.0 }
        })
        .collect()
}

pub fn distinct(values: impl IntoIterator<Item = u32>) -> BTreeSet<u32> {
    values.into_iter().collect()
}
