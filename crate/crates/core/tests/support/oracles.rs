//! Slow reference implementations used to check the fast paths. Nothing
//! here calls into the algorithms it checks beyond reading snapshot
//! adjacency.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chronopath_core::chronopath::Chronopath;
use chronopath_core::snapshot::Snapshot;
use chronopath_core::VertexId;

/// Bellman-Ford over an explicit edge list. `None` = unreachable.
pub fn bellman_ford(n: usize, edges: &[(u32, u32, f64)], source: u32) -> Vec<Option<f64>> {
    let mut dist = vec![None; n];
    dist[source as usize] = Some(0.0);
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in edges {
            if let Some(du) = dist[u as usize] {
                let nd = du + w;
                if dist[v as usize].is_none_or(|dv: f64| nd < dv) {
                    dist[v as usize] = Some(nd);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Coreness by repeated deletion: for each k, strip vertices of degree < k
/// until none remain; survivors have coreness >= k.
pub fn brute_force_coreness(n: usize, edges: &[(u32, u32)]) -> Vec<u32> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a as usize].insert(b as usize);
            adj[b as usize].insert(a as usize);
        }
    }
    let mut coreness = vec![0u32; n];
    let max_deg = adj.iter().map(BTreeSet::len).max().unwrap_or(0);
    for k in 1..=max_deg {
        let mut alive = vec![true; n];
        loop {
            let mut removed = false;
            for v in 0..n {
                if alive[v] && adj[v].iter().filter(|&&u| alive[u]).count() < k {
                    alive[v] = false;
                    removed = true;
                }
            }
            if !removed {
                break;
            }
        }
        for v in 0..n {
            if alive[v] {
                coreness[v] = k as u32;
            }
        }
    }
    coreness
}

/// Lexicographic path cost: (length, hops).
pub type LenHops = (f64, u32);

fn better(a: LenHops, b: LenHops) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// All-pairs (length, hops) minima inside `allowed`, over the snapshot's
/// collapsed out-edges. `hops_cost` charges 1 per edge instead of weight.
pub fn floyd_warshall(s: &Snapshot, allowed: &[bool], hops_cost: bool) -> Vec<Vec<Option<LenHops>>> {
    let n = s.vertex_count();
    let mut d: Vec<Vec<Option<LenHops>>> = vec![vec![None; n]; n];
    for u in 0..n {
        if !allowed[u] {
            continue;
        }
        d[u][u] = Some((0.0, 0));
        for a in s.out_neighbors(u as u32) {
            let v = a.neighbor as usize;
            if v != u && allowed[v] {
                let w = if hops_cost { 1.0 } else { a.weight };
                if d[u][v].is_none_or(|c| better((w, 1), c)) {
                    d[u][v] = Some((w, 1));
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                let Some(kj) = d[k][j] else { continue };
                let c = (ik.0 + kj.0, ik.1 + kj.1);
                if d[i][j].is_none_or(|x| better(c, x)) {
                    d[i][j] = Some(c);
                }
            }
        }
    }
    d
}

/// Optimal (length, segments, hops) over every stitching of per-snapshot
/// shortest segments through consecutive snapshots, where every vertex must
/// be allowed in its layer. Enumerates start layer and every handoff vertex.
pub fn exhaustive_stitching(
    snapshots: &[Snapshot],
    allowed: &[Vec<bool>],
    source: u32,
    target: u32,
    hops_cost: bool,
) -> Option<(f64, u32, u32)> {
    let dists: Vec<_> = snapshots.iter().zip(allowed).map(|(s, a)| floyd_warshall(s, a, hops_cost)).collect();
    let mut best: Option<(f64, u32, u32)> = None;
    fn lt(a: (f64, u32, u32), b: (f64, u32, u32)) -> bool {
        a.0 < b.0 || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2))
    }
    #[allow(clippy::too_many_arguments)]
    fn walk(
        dists: &[Vec<Vec<Option<LenHops>>>],
        allowed: &[Vec<bool>],
        layer: usize,
        entry: usize,
        acc: (f64, u32, u32),
        target: usize,
        best: &mut Option<(f64, u32, u32)>,
    ) {
        let d = &dists[layer];
        if let Some((l, h)) = d[entry][target] {
            let c = (acc.0 + l, acc.1, acc.2 + h);
            if best.is_none_or(|b| lt(c, b)) {
                *best = Some(c);
            }
        }
        if layer + 1 < dists.len() {
            for h in 0..d.len() {
                if !allowed[layer + 1][h] {
                    continue;
                }
                if let Some((l, hops)) = d[entry][h] {
                    walk(dists, allowed, layer + 1, h, (acc.0 + l, acc.1 + 1, acc.2 + hops), target, best);
                }
            }
        }
    }
    for start in 0..snapshots.len() {
        if allowed[start][source as usize] {
            walk(&dists, allowed, start, source as usize, (0.0, 1, 0), target as usize, &mut best);
        }
    }
    best
}

/// Frequencies by nested loops: for every edge seen anywhere, scan every
/// path and count those containing it.
pub fn brute_force_edge_counts(paths: &[Chronopath]) -> BTreeMap<(u32, u32, usize), Vec<usize>> {
    let mut all = BTreeSet::new();
    for p in paths {
        for seg in &p.segments {
            for w in seg.vertices.windows(2) {
                all.insert((w[0], w[1], seg.snapshot));
            }
        }
    }
    let mut out = BTreeMap::new();
    for e in all {
        let mut members = Vec::new();
        for (i, p) in paths.iter().enumerate() {
            let mut found = false;
            for seg in &p.segments {
                for w in seg.vertices.windows(2) {
                    if (w[0], w[1], seg.snapshot) == e {
                        found = true;
                    }
                }
            }
            if found {
                members.push(i);
            }
        }
        out.insert(e, members);
    }
    out
}

/// Checks every structural rule of a strict result. Returns a description of
/// the first violation.
pub fn strict_violation(
    path: &Chronopath,
    snapshots: &[Snapshot],
    allowed: &[Vec<bool>],
    source: VertexId,
    target: VertexId,
    hops_cost: bool,
) -> Option<String> {
    if path.segments.is_empty() {
        return Some("no segments".into());
    }
    if path.source() != Some(source) || path.target() != Some(target) {
        return Some(format!("endpoints {:?}->{:?}", path.source(), path.target()));
    }
    if path.hdv_fraction != 1.0 {
        return Some(format!("hdv_fraction {}", path.hdv_fraction));
    }
    for pair in path.segments.windows(2) {
        if pair[1].snapshot != pair[0].snapshot + 1 {
            return Some("snapshots not consecutive".into());
        }
        if pair[0].vertices.last() != pair[1].vertices.first() {
            return Some("handoff mismatch".into());
        }
    }
    for seg in &path.segments {
        let s = &snapshots[seg.snapshot];
        for &v in &seg.vertices {
            if !allowed[seg.snapshot][v as usize] {
                return Some(format!("vertex {v} not dynamic in snapshot {}", seg.snapshot));
            }
        }
        for w in seg.vertices.windows(2) {
            if !s.out_neighbors(w[0]).iter().any(|a| a.neighbor == w[1]) {
                return Some(format!("{}->{} not adjacent in snapshot {}", w[0], w[1], seg.snapshot));
            }
        }
        let fw = floyd_warshall(s, &allowed[seg.snapshot], hops_cost);
        let first = seg.vertices[0] as usize;
        let last = *seg.vertices.last().unwrap() as usize;
        if fw[first][last].map(|c| c.0) != Some(seg.length) {
            return Some(format!("segment in snapshot {} is not shortest", seg.snapshot));
        }
    }
    None
}
