//! Core decomposition and the per-snapshot significant subgraph: the
//! largest k-core that still contains every highly dynamic vertex.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::snapshot::Snapshot;
use crate::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreDecomposition {
    pub index: usize,
    /// `coreness[v]`, indexed by vertex id.
    pub coreness: Vec<u32>,
}

impl CoreDecomposition {
    pub fn coreness(&self, v: VertexId) -> u32 {
        self.coreness[v as usize]
    }

    pub fn max_core(&self) -> u32 {
        self.coreness.iter().copied().max().unwrap_or(0)
    }
}

/// Bucket-based peeling (Batagelj–Zaversnik) over adjacency in CSR form.
/// Runs in `O(n + m)`.
pub fn coreness_from_csr(offsets: &[usize], neighbors: &[VertexId]) -> Vec<u32> {
    let n = offsets.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let mut degree: Vec<usize> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
    let max_degree = degree.iter().copied().max().unwrap_or(0);

    // bin[d] = start of the degree-d block in `order`.
    let mut bin = vec![0usize; max_degree + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[degree[v]];
        order[pos[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_degree).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..n {
        let v = order[i];
        for &u in &neighbors[offsets[v]..offsets[v + 1]] {
            let u = u as usize;
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order[pu] = w;
                    pos[w] = pu;
                    order[pw] = u;
                    pos[u] = pw;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree.into_iter().map(|d| d as u32).collect()
}

/// Coreness on the undirected simple view of the snapshot.
pub fn core_decomposition(snapshot: &Snapshot) -> CoreDecomposition {
    let (offsets, neighbors) = snapshot.simple_neighbors();
    CoreDecomposition { index: snapshot.index(), coreness: coreness_from_csr(&offsets, &neighbors) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificantSubgraph {
    pub index: usize,
    /// `None` when the snapshot has no highly dynamic vertices.
    pub k_star: Option<u32>,
    /// Sorted vertex ids.
    pub vertices: Vec<VertexId>,
    /// Collapsed snapshot edges with both endpoints in `vertices`, as
    /// `(src, dst, weight)`.
    pub edges: Vec<(VertexId, VertexId, f64)>,
}

impl SignificantSubgraph {
    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn mask(&self, vertex_count: usize) -> Vec<bool> {
        let mut mask = vec![false; vertex_count];
        for &v in &self.vertices {
            mask[v as usize] = true;
        }
        mask
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// `k* = min coreness over hdv`; the subgraph is the induced `k*`-core.
///
/// With `k* = 0` (some HDV has no simple neighbors) the vertex set is every
/// non-isolated vertex plus the HDVs themselves.
pub fn significant_subgraph(snapshot: &Snapshot, cores: &CoreDecomposition, hdv: &[VertexId]) -> SignificantSubgraph {
    let index = snapshot.index();
    let Some(k_star) = hdv.iter().map(|&v| cores.coreness(v)).min() else {
        return SignificantSubgraph { index, k_star: None, vertices: Vec::new(), edges: Vec::new() };
    };

    let n = snapshot.vertex_count();
    let mut mask: Vec<bool> = if k_star == 0 {
        cores.coreness.iter().map(|&c| c >= 1).collect()
    } else {
        cores.coreness.iter().map(|&c| c >= k_star).collect()
    };
    for &v in hdv {
        mask[v as usize] = true;
    }
    let vertices: Vec<VertexId> = (0..n as VertexId).filter(|&v| mask[v as usize]).collect();
    let edges = snapshot
        .pairs()
        .filter(|(u, v, _)| mask[*u as usize] && mask[*v as usize])
        .map(|(u, v, a)| (u, v, a.weight))
        .collect();
    SignificantSubgraph { index, k_star: Some(k_star), vertices, edges }
}
