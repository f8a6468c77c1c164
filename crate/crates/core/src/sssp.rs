//! Deterministic Dijkstra over one snapshot, optionally restricted to a
//! vertex mask or run against edge direction.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::snapshot::{AdjEntry, Snapshot};
use crate::{Error, Result, VertexId};

/// How an edge is charged during search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Collapsed (minimum) edge weight.
    #[default]
    Weight,
    /// Every edge costs 1.
    Hops,
}

impl CostMode {
    #[inline]
    pub fn charge(self, weight: f64) -> f64 {
        match self {
            CostMode::Weight => weight,
            CostMode::Hops => 1.0,
        }
    }

    #[inline]
    pub fn cost(self, entry: &AdjEntry) -> f64 {
        self.charge(entry.weight)
    }
}

/// A snapshot viewed as a search graph.
#[derive(Debug, Clone, Copy)]
pub struct SearchGraph<'a> {
    snapshot: &'a Snapshot,
    allowed: Option<&'a [bool]>,
    reversed: bool,
    cost: CostMode,
}

impl<'a> SearchGraph<'a> {
    pub fn full(snapshot: &'a Snapshot) -> Self {
        Self { snapshot, allowed: None, reversed: false, cost: CostMode::Weight }
    }

    /// Only vertices with `allowed[v]` may be entered.
    pub fn restricted(snapshot: &'a Snapshot, allowed: &'a [bool]) -> Self {
        Self { allowed: Some(allowed), ..Self::full(snapshot) }
    }

    /// Follow edges backwards (distances *to* the source).
    pub fn reversed(self) -> Self {
        Self { reversed: !self.reversed, ..self }
    }

    pub fn with_cost(self, cost: CostMode) -> Self {
        Self { cost, ..self }
    }

    pub fn snapshot(&self) -> &'a Snapshot {
        self.snapshot
    }

    pub fn cost_mode(&self) -> CostMode {
        self.cost
    }

    pub fn vertex_count(&self) -> usize {
        self.snapshot.vertex_count()
    }

    #[inline]
    pub fn allows(&self, v: VertexId) -> bool {
        self.allowed.is_none_or(|m| m[v as usize])
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &'a [AdjEntry] {
        if self.reversed {
            self.snapshot.in_neighbors(v)
        } else {
            self.snapshot.out_neighbors(v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: VertexId,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap: smaller distance, then smaller id, first.
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortestPathTree {
    pub source: VertexId,
    /// `f64::INFINITY` for unreachable vertices.
    pub dist: Vec<f64>,
    pub parent: Vec<Option<VertexId>>,
}

impl ShortestPathTree {
    pub fn distance(&self, v: VertexId) -> Option<f64> {
        self.dist.get(v as usize).copied().filter(|d| d.is_finite())
    }

    /// Vertices from the source to `v`, following parent pointers.
    pub fn path_to(&self, v: VertexId) -> Option<Vec<VertexId>> {
        let mut path = self.walk_to_source(v)?;
        path.reverse();
        Some(path)
    }

    /// Vertices from `v` back to the source. For a reversed search this is
    /// the forward path from `v` to the source.
    pub fn walk_to_source(&self, v: VertexId) -> Option<Vec<VertexId>> {
        self.distance(v)?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur as usize] {
            path.push(p);
            cur = p;
        }
        Some(path)
    }
}

/// Single-source shortest paths.
///
/// Vertices settle in `(distance, id)` order. Among equal-distance
/// predecessors the smaller id becomes the parent. The source is always
/// settled even if the mask excludes it.
pub fn sssp(graph: SearchGraph<'_>, source: VertexId) -> Result<ShortestPathTree> {
    let n = graph.vertex_count();
    if source as usize >= n {
        return Err(Error::VertexOutOfRange(source));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(HeapItem { dist: 0.0, vertex: source });

    while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
        if settled[u as usize] || d > dist[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        for entry in graph.neighbors(u) {
            let v = entry.neighbor;
            if !(entry.weight >= 0.0) {
                return Err(negative(graph, u, entry));
            }
            if !graph.allows(v) || settled[v as usize] {
                continue;
            }
            let nd = d + graph.cost.cost(entry);
            let slot = &mut dist[v as usize];
            if nd < *slot {
                *slot = nd;
                parent[v as usize] = Some(u);
                heap.push(HeapItem { dist: nd, vertex: v });
            } else if nd == *slot && parent[v as usize].is_some_and(|p| u < p) {
                parent[v as usize] = Some(u);
            }
        }
    }
    Ok(ShortestPathTree { source, dist, parent })
}

fn negative(graph: SearchGraph<'_>, u: VertexId, entry: &AdjEntry) -> Error {
    let (src, dst) = if graph.reversed { (entry.neighbor, u) } else { (u, entry.neighbor) };
    Error::NegativeWeight { src, dst, weight: entry.weight }
}
