//! Cumulative snapshots. An edge belongs to snapshot `S_i` iff
//! `t_end <= t_i`; edges never expire.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{TemporalEdge, TemporalGraph};
use crate::{Error, Result, Timestamp, VertexId};

/// Membership rule: boundary inclusive.
#[inline]
pub fn edge_in_snapshot(edge: &TemporalEdge, boundary: Timestamp) -> bool {
    edge.t_end <= boundary
}

/// `t_0 = t_min`, `t_i = t_min + ceil(i * (t_max - t_min) / n)`.
///
/// When the span is shorter than `n` consecutive boundaries can coincide.
pub fn interval_boundaries(t_min: Timestamp, t_max: Timestamp, n_intervals: usize) -> Result<Vec<Timestamp>> {
    if n_intervals == 0 {
        return Err(Error::ZeroIntervals);
    }
    let span = (i128::from(t_max) - i128::from(t_min)).max(0);
    let n = n_intervals as i128;
    Ok((0..=n)
        .map(|i| {
            let offset = (i * span + n - 1) / n;
            (i128::from(t_min) + if i == 0 { 0 } else { offset }) as Timestamp
        })
        .collect())
}

/// Collapsed adjacency entry: all parallel raw edges between one ordered
/// pair (unordered for undirected graphs) present at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjEntry {
    pub neighbor: VertexId,
    /// Minimum weight over the parallel edges.
    pub weight: f64,
    pub multiplicity: u32,
}

/// Per-vertex aggregates over incident raw edges, used by dynamicity scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VertexStats {
    /// Raw incident edge count, out plus in. A self-loop counts twice.
    pub incident: u32,
    /// Sum of `1 / w` over incident edges with `w > 0`.
    pub recip_sum: f64,
    /// Incident edges with weight exactly zero.
    pub zero_weight: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    index: usize,
    boundary: Timestamp,
    directed: bool,
    out_offsets: Vec<usize>,
    out_entries: Vec<AdjEntry>,
    in_offsets: Vec<usize>,
    in_entries: Vec<AdjEntry>,
    stats: Vec<VertexStats>,
    raw_edge_count: usize,
    distinct_edge_count: usize,
    pair_count: usize,
}

fn csr(vertex_count: usize, mut triples: Vec<(VertexId, VertexId, f64)>) -> (Vec<usize>, Vec<AdjEntry>) {
    triples.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    let mut offsets = vec![0usize; vertex_count + 1];
    let mut entries: Vec<AdjEntry> = Vec::new();
    let mut owners: Vec<VertexId> = Vec::new();
    for (u, v, w) in triples {
        match (owners.last(), entries.last_mut()) {
            (Some(&o), Some(last)) if o == u && last.neighbor == v => {
                // Sorted by weight within the pair: first entry already holds the minimum.
                last.multiplicity += 1;
            }
            _ => {
                owners.push(u);
                entries.push(AdjEntry { neighbor: v, weight: w, multiplicity: 1 });
            }
        }
    }
    for &o in &owners {
        offsets[o as usize + 1] += 1;
    }
    for i in 0..vertex_count {
        offsets[i + 1] += offsets[i];
    }
    (offsets, entries)
}

impl Snapshot {
    /// Builds snapshot `index` holding every edge of `graph` with
    /// `t_end <= boundary`.
    pub fn build(graph: &TemporalGraph, index: usize, boundary: Timestamp) -> Self {
        let n = graph.vertex_count();
        let edges = graph.edges();
        // Edges are sorted by t_end, so the member set is a prefix.
        let present = &edges[..edges.partition_point(|e| edge_in_snapshot(e, boundary))];

        let mut stats = vec![VertexStats::default(); n];
        for e in present {
            for v in [e.src, e.dst] {
                let s = &mut stats[v as usize];
                s.incident += 1;
                if e.weight > 0.0 {
                    s.recip_sum += 1.0 / e.weight;
                } else {
                    s.zero_weight += 1;
                }
            }
        }

        let directed = graph.is_directed();
        let (out_offsets, out_entries, in_offsets, in_entries, pair_count) = if directed {
            let (oo, oe) = csr(n, present.iter().map(|e| (e.src, e.dst, e.weight)).collect());
            let (io, ie) = csr(n, present.iter().map(|e| (e.dst, e.src, e.weight)).collect());
            let pairs = oe.len();
            (oo, oe, io, ie, pairs)
        } else {
            let mut triples = Vec::with_capacity(present.len() * 2);
            for e in present {
                triples.push((e.src, e.dst, e.weight));
                if e.src != e.dst {
                    triples.push((e.dst, e.src, e.weight));
                }
            }
            let (oo, oe) = csr(n, triples);
            let mut pairs = 0;
            for u in 0..n {
                pairs += oe[oo[u]..oo[u + 1]].iter().filter(|a| a.neighbor as usize >= u).count();
            }
            (oo, oe, Vec::new(), Vec::new(), pairs)
        };

        let mut keys: Vec<_> = present.iter().map(TemporalEdge::key).collect();
        keys.sort_unstable();
        keys.dedup();

        Self {
            index,
            boundary,
            directed,
            out_offsets,
            out_entries,
            in_offsets,
            in_entries,
            stats,
            raw_edge_count: present.len(),
            distinct_edge_count: keys.len(),
            pair_count,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn boundary(&self) -> Timestamp {
        self.boundary
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_count(&self) -> usize {
        self.stats.len()
    }

    /// Raw temporal edges present (parallel edges counted separately).
    pub fn raw_edge_count(&self) -> usize {
        self.raw_edge_count
    }

    /// Distinct `(src, dst, t_start, t_end, weight)` edges present.
    pub fn distinct_edge_count(&self) -> usize {
        self.distinct_edge_count
    }

    /// Collapsed adjacency pairs (unordered for undirected graphs).
    pub fn edge_count(&self) -> usize {
        self.pair_count
    }

    /// Successors sorted by id. For undirected snapshots, all neighbors.
    pub fn out_neighbors(&self, v: VertexId) -> &[AdjEntry] {
        let v = v as usize;
        &self.out_entries[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// Predecessors sorted by id. For undirected snapshots, all neighbors.
    pub fn in_neighbors(&self, v: VertexId) -> &[AdjEntry] {
        if !self.directed {
            return self.out_neighbors(v);
        }
        let v = v as usize;
        &self.in_entries[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn stats(&self, v: VertexId) -> VertexStats {
        self.stats[v as usize]
    }

    /// Incident raw edge count.
    pub fn degree(&self, v: VertexId) -> u32 {
        self.stats[v as usize].incident
    }

    /// True when `v` has at least one incident edge in this snapshot.
    pub fn contains(&self, v: VertexId) -> bool {
        self.stats.get(v as usize).is_some_and(|s| s.incident > 0)
    }

    /// Collapsed pairs as `(src, dst, entry)`. Undirected pairs are yielded
    /// once with `src <= dst`.
    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId, AdjEntry)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .filter(move |a| self.directed || a.neighbor >= u)
                .map(move |a| (u, a.neighbor, *a))
        })
    }

    /// Undirected simple neighbor sets: directions, multiplicities and
    /// self-loops dropped.
    pub fn simple_neighbors(&self) -> (Vec<usize>, Vec<VertexId>) {
        let n = self.vertex_count();
        let mut offsets = vec![0usize; n + 1];
        let mut flat = Vec::with_capacity(self.out_entries.len() * 2);
        let mut scratch: Vec<VertexId> = Vec::new();
        for u in 0..n as VertexId {
            scratch.clear();
            scratch.extend(self.out_neighbors(u).iter().map(|a| a.neighbor));
            if self.directed {
                scratch.extend(self.in_neighbors(u).iter().map(|a| a.neighbor));
                scratch.sort_unstable();
                scratch.dedup();
            }
            flat.extend(scratch.iter().copied().filter(|&x| x != u));
            offsets[u as usize + 1] = flat.len();
        }
        (offsets, flat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSequence {
    snapshots: Vec<Snapshot>,
}

impl SnapshotSequence {
    /// Wraps snapshots built elsewhere (for instance by a worker pool).
    /// Snapshots are reordered by index.
    pub fn from_snapshots(mut snapshots: Vec<Snapshot>) -> Self {
        snapshots.sort_by_key(Snapshot::index);
        Self { snapshots }
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn get(&self, index: usize) -> Result<&Snapshot> {
        self.snapshots
            .get(index)
            .ok_or(Error::SnapshotOutOfRange { index, len: self.snapshots.len() })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn boundaries(&self) -> Vec<Timestamp> {
        self.snapshots.iter().map(Snapshot::boundary).collect()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn vertex_count(&self) -> usize {
        self.snapshots.first().map_or(0, Snapshot::vertex_count)
    }
}

/// Checks the build preconditions and returns the boundaries.
pub fn plan_snapshots(graph: &TemporalGraph, n_intervals: usize) -> Result<Vec<Timestamp>> {
    if n_intervals == 0 {
        return Err(Error::ZeroIntervals);
    }
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    interval_boundaries(graph.t_min(), graph.t_max(), n_intervals)
}

/// Builds the `n_intervals + 1` cumulative snapshots sequentially.
pub fn build_snapshots(graph: &TemporalGraph, n_intervals: usize) -> Result<SnapshotSequence> {
    let boundaries = plan_snapshots(graph, n_intervals)?;
    Ok(SnapshotSequence {
        snapshots: boundaries
            .iter()
            .enumerate()
            .map(|(i, &b)| Snapshot::build(graph, i, b))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexView {
    pub id: VertexId,
    pub out_degree: u32,
    pub in_degree: u32,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: f64,
    pub multiplicity: u32,
}

/// Listing of the vertices present in a snapshot and its collapsed edges,
/// both in ascending id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotView {
    pub index: usize,
    pub boundary: Timestamp,
    pub vertices: Vec<VertexView>,
    pub edges: Vec<EdgeView>,
}

pub fn snapshot_view(seq: &SnapshotSequence, index: usize) -> Result<SnapshotView> {
    let s = seq.get(index)?;
    let raw = |entries: &[AdjEntry]| entries.iter().map(|a| a.multiplicity).sum::<u32>();
    let vertices = (0..s.vertex_count() as VertexId)
        .filter(|&v| s.contains(v))
        .map(|v| {
            let (out_degree, in_degree) = if s.is_directed() {
                (raw(s.out_neighbors(v)), raw(s.in_neighbors(v)))
            } else {
                (s.degree(v), s.degree(v))
            };
            VertexView { id: v, out_degree, in_degree, degree: s.degree(v) }
        })
        .collect();
    let edges = s
        .pairs()
        .map(|(src, dst, a)| EdgeView { src, dst, weight: a.weight, multiplicity: a.multiplicity })
        .collect();
    Ok(SnapshotView { index, boundary: s.boundary(), vertices, edges })
}
