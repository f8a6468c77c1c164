//! Cross-snapshot shortest paths.
//!
//! A chronopath is a list of per-snapshot segments with increasing snapshot
//! indices; each segment ends at the vertex where the next one begins (the
//! handoff vertex).
//!
//! * Strict queries ([`find_chronopath`]) use consecutive snapshots only and
//!   every vertex must be highly dynamic in its segment's snapshot. They are
//!   solved exactly as a layered search over `(snapshot, vertex)` states:
//!   inside a layer the snapshot's edges are followed, and a zero-cost
//!   handoff moves a vertex from layer `i` to layer `i + 1`. Ties on length
//!   go to fewer segments, then fewer edges, then the lexicographically
//!   smallest vertex sequence.
//! * Relaxed queries ([`find_relaxed_chronopath`]) search whole snapshots,
//!   may skip snapshots, and rank candidates by [`significance_score`].

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::dynamicity::DynamicityReport;
use crate::kcore::SignificantSubgraph;
use crate::snapshot::{Snapshot, SnapshotSequence};
use crate::sssp::{sssp, CostMode, SearchGraph, ShortestPathTree};
use crate::{Error, Result, VertexId};

pub const DEFAULT_MAX_CANDIDATES: usize = 16;
pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    #[default]
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathQuery {
    pub source: VertexId,
    pub targets: Vec<VertexId>,
    pub mode: PathMode,
    /// Relaxed mode: candidates kept per target.
    pub max_candidates: usize,
    /// Weight of the HDV fraction in the significance score.
    pub lambda: f64,
    pub cost: CostMode,
    /// Strict mode: let the final vertex be a non-HDV member of the
    /// significant subgraph.
    pub exempt_targets: bool,
}

impl PathQuery {
    pub fn new(source: VertexId, targets: Vec<VertexId>, mode: PathMode) -> Self {
        Self {
            source,
            targets,
            mode,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            lambda: DEFAULT_LAMBDA,
            cost: CostMode::Weight,
            exempt_targets: false,
        }
    }

    pub fn strict(source: VertexId, targets: Vec<VertexId>) -> Self {
        Self::new(source, targets, PathMode::Strict)
    }

    pub fn relaxed(source: VertexId, targets: Vec<VertexId>) -> Self {
        Self::new(source, targets, PathMode::Relaxed)
    }

    fn check(&self, vertex_count: usize) -> Result<Vec<VertexId>> {
        if self.targets.is_empty() {
            return Err(Error::EmptyTargets);
        }
        if self.source as usize >= vertex_count {
            return Err(Error::VertexOutOfRange(self.source));
        }
        if let Some(&t) = self.targets.iter().find(|&&t| t as usize >= vertex_count) {
            return Err(Error::VertexOutOfRange(t));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!("lambda must lie in [0, 1] (got {})", self.lambda)));
        }
        if self.max_candidates == 0 {
            return Err(Error::InvalidConfig("max_candidates must be at least 1".into()));
        }
        let mut targets = self.targets.clone();
        targets.sort_unstable();
        targets.dedup();
        Ok(targets)
    }
}

/// Which graph a segment was searched in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentScope {
    /// Highly dynamic vertices of the snapshot's significant subgraph.
    HdvSubgraph,
    FullSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub snapshot: usize,
    /// Entry vertex first, handoff (or target) vertex last.
    pub vertices: Vec<VertexId>,
    /// Cost charged for each edge along `vertices`.
    pub weights: Vec<f64>,
    pub length: f64,
    pub scope: SegmentScope,
}

impl PathSegment {
    fn from_vertices(snapshot: &Snapshot, vertices: Vec<VertexId>, cost: CostMode, scope: SegmentScope) -> Self {
        let weights: Vec<f64> = vertices
            .windows(2)
            .map(|w| {
                snapshot
                    .out_neighbors(w[0])
                    .binary_search_by_key(&w[1], |a| a.neighbor)
                    .map(|i| cost.cost(&snapshot.out_neighbors(w[0])[i]))
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let length = weights.iter().sum();
        Self { snapshot: snapshot.index(), vertices, weights, length, scope }
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chronopath {
    pub segments: Vec<PathSegment>,
    pub total_length: f64,
    pub hdv_fraction: f64,
    pub significance: f64,
}

impl Chronopath {
    fn assemble(segments: Vec<PathSegment>, report: &DynamicityReport, lambda: f64) -> Self {
        let total_length = segments.iter().map(|s| s.length).sum();
        let mut path = Self { segments, total_length, hdv_fraction: 0.0, significance: 0.0 };
        path.hdv_fraction = hdv_fraction(&path, report);
        path.significance = significance_score(&path, lambda);
        path
    }

    pub fn source(&self) -> Option<VertexId> {
        self.segments.first().and_then(|s| s.vertices.first().copied())
    }

    pub fn target(&self) -> Option<VertexId> {
        self.segments.last().and_then(|s| s.vertices.last().copied())
    }

    /// Edges traversed; handoffs add none.
    pub fn edge_count(&self) -> usize {
        self.segments.iter().map(PathSegment::edge_count).sum()
    }

    /// Segment vertex lists concatenated (handoff vertices appear twice).
    pub fn vertex_sequence(&self) -> Vec<VertexId> {
        self.segments.iter().flat_map(|s| s.vertices.iter().copied()).collect()
    }

    pub fn snapshot_sequence(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.snapshot).collect()
    }

    /// Sorted distinct vertices.
    pub fn distinct_vertices(&self) -> Vec<VertexId> {
        let mut v = self.vertex_sequence();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `(src, dst, snapshot)` for every traversed edge, in path order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, usize)> + '_ {
        self.segments
            .iter()
            .flat_map(|s| s.vertices.windows(2).map(move |w| (w[0], w[1], s.snapshot)))
    }
}

/// Fraction of distinct path vertices that are highly dynamic in at least
/// one snapshot where they appear on the path.
pub fn hdv_fraction(path: &Chronopath, report: &DynamicityReport) -> f64 {
    let mut seen: BTreeMap<VertexId, bool> = BTreeMap::new();
    for seg in &path.segments {
        for &v in &seg.vertices {
            let flag = report.is_hdv(seg.snapshot, v);
            seen.entry(v).and_modify(|f| *f |= flag).or_insert(flag);
        }
    }
    if seen.is_empty() {
        return 0.0;
    }
    seen.values().filter(|f| **f).count() as f64 / seen.len() as f64
}

/// `lambda * hdv_fraction + (1 - lambda) / (1 + total_length)`.
pub fn significance_score(path: &Chronopath, lambda: f64) -> f64 {
    score_parts(path.hdv_fraction, path.total_length, lambda)
}

#[inline]
fn score_parts(hdv_fraction: f64, total_length: f64, lambda: f64) -> f64 {
    lambda * hdv_fraction + (1.0 - lambda) / (1.0 + total_length)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPaths {
    pub target: VertexId,
    /// Empty when the target is unreachable. Strict mode holds at most one.
    pub paths: Vec<Chronopath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query: PathQuery,
    /// One entry per distinct target, ascending.
    pub results: Vec<TargetPaths>,
}

impl QueryResult {
    /// No paths for any target.
    pub fn empty(mut query: PathQuery) -> Self {
        query.targets.sort_unstable();
        query.targets.dedup();
        let results = query.targets.iter().map(|&target| TargetPaths { target, paths: Vec::new() }).collect();
        Self { query, results }
    }

    pub fn paths(&self) -> impl Iterator<Item = &Chronopath> {
        self.results.iter().flat_map(|r| r.paths.iter())
    }

    pub fn best(&self, target: VertexId) -> Option<&Chronopath> {
        self.results.iter().find(|r| r.target == target).and_then(|r| r.paths.first())
    }
}

// ---------------------------------------------------------------------------
// Strict search

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    len: f64,
    segs: u32,
    hops: u32,
}

impl Cost {
    const START: Cost = Cost { len: 0.0, segs: 1, hops: 0 };

    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .total_cmp(&other.len)
            .then(self.segs.cmp(&other.segs))
            .then(self.hops.cmp(&other.hops))
    }

    fn step(self, w: f64) -> Self {
        Cost { len: self.len + w, segs: self.segs, hops: self.hops + 1 }
    }

    fn handoff(self) -> Self {
        Cost { segs: self.segs + 1, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CostItem(Cost, VertexId);

impl Eq for CostItem {}

impl Ord for CostItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for CostItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Layered search space shared by strict queries.
struct StrictSpace<'a> {
    snapshots: &'a [Snapshot],
    /// `expand[i][v]`: `v` may carry the path through layer `i`.
    expand: Vec<Vec<bool>>,
    /// `sink[i][v]`: `v` may end a path in layer `i` without being expandable.
    sink: Vec<Vec<bool>>,
    cost: CostMode,
    scope: SegmentScope,
}

impl StrictSpace<'_> {
    fn enter(&self, i: usize, v: VertexId) -> bool {
        self.expand[i][v as usize] || self.sink[i][v as usize]
    }

    fn layer_search(&self, i: usize, init: &[(VertexId, Cost)]) -> Result<Vec<Option<Cost>>> {
        let snapshot = &self.snapshots[i];
        let n = snapshot.vertex_count();
        let mut dist: Vec<Option<Cost>> = vec![None; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &(v, c) in init {
            let slot = &mut dist[v as usize];
            if slot.is_none_or(|d| c.cmp(&d) == Ordering::Less) {
                *slot = Some(c);
                heap.push(CostItem(c, v));
            }
        }
        while let Some(CostItem(c, u)) = heap.pop() {
            if settled[u as usize] || dist[u as usize] != Some(c) {
                continue;
            }
            settled[u as usize] = true;
            if !self.expand[i][u as usize] {
                continue;
            }
            for entry in snapshot.out_neighbors(u) {
                if !(entry.weight >= 0.0) {
                    return Err(Error::NegativeWeight { src: u, dst: entry.neighbor, weight: entry.weight });
                }
                let v = entry.neighbor;
                if v == u || !self.enter(i, v) || settled[v as usize] {
                    continue;
                }
                let nc = c.step(self.cost.cost(entry));
                if dist[v as usize].is_none_or(|d| nc.cmp(&d) == Ordering::Less) {
                    dist[v as usize] = Some(nc);
                    heap.push(CostItem(nc, v));
                }
            }
        }
        Ok(dist)
    }

    fn run(&self, source: VertexId) -> Result<Vec<Vec<Option<Cost>>>> {
        let mut layers: Vec<Vec<Option<Cost>>> = Vec::with_capacity(self.snapshots.len());
        for i in 0..self.snapshots.len() {
            let mut init = Vec::new();
            if self.expand[i][source as usize] {
                init.push((source, Cost::START));
            }
            if let Some(prev) = layers.last() {
                for (v, c) in prev.iter().enumerate() {
                    if let Some(c) = c {
                        if self.expand[i - 1][v] && self.expand[i][v] {
                            init.push((v as VertexId, c.handoff()));
                        }
                    }
                }
            }
            layers.push(self.layer_search(i, &init)?);
        }
        Ok(layers)
    }

    fn tight_step(&self, layers: &[Vec<Option<Cost>>], i: usize, u: VertexId, v: VertexId, w: f64) -> bool {
        if !self.expand[i][u as usize] || !self.enter(i, v) || u == v {
            return false;
        }
        match (layers[i][u as usize], layers[i][v as usize]) {
            (Some(cu), Some(cv)) => cu.step(self.cost.charge(w)).cmp(&cv) == Ordering::Equal,
            _ => false,
        }
    }

    fn tight_handoff(&self, layers: &[Vec<Option<Cost>>], i: usize, v: VertexId) -> bool {
        // (i, v) -> (i + 1, v)
        if i + 1 >= layers.len() || !self.expand[i][v as usize] || !self.expand[i + 1][v as usize] {
            return false;
        }
        match (layers[i][v as usize], layers[i + 1][v as usize]) {
            (Some(a), Some(b)) => a.handoff().cmp(&b) == Ordering::Equal,
            _ => false,
        }
    }

    /// Lexicographically smallest optimal path to `target`, if reachable.
    fn reconstruct(&self, layers: &[Vec<Option<Cost>>], source: VertexId, target: VertexId) -> Option<Vec<(usize, VertexId)>> {
        let best = layers
            .iter()
            .enumerate()
            .filter(|(i, _)| self.enter(*i, target))
            .filter_map(|(_, l)| l[target as usize])
            .min_by(|a, b| a.cmp(b))?;
        let is_end = |i: usize, v: VertexId| {
            v == target && self.enter(i, v) && layers[i][v as usize].is_some_and(|c| c.cmp(&best) == Ordering::Equal)
        };

        // Mark states that reach an optimal end state along tight moves.
        let mut useful: Vec<Vec<bool>> = layers.iter().map(|l| vec![false; l.len()]).collect();
        let mut stack: Vec<(usize, VertexId)> = (0..layers.len()).filter(|&i| is_end(i, target)).map(|i| (i, target)).collect();
        for &(i, v) in &stack {
            useful[i][v as usize] = true;
        }
        while let Some((i, v)) = stack.pop() {
            for entry in self.snapshots[i].in_neighbors(v) {
                let u = entry.neighbor;
                if !useful[i][u as usize] && self.tight_step(layers, i, u, v, entry.weight) {
                    useful[i][u as usize] = true;
                    stack.push((i, u));
                }
            }
            if i > 0 && !useful[i - 1][v as usize] && self.tight_handoff(layers, i - 1, v) {
                useful[i - 1][v as usize] = true;
                stack.push((i - 1, v));
            }
        }

        let mut frontier: Vec<usize> = (0..layers.len())
            .filter(|&i| {
                useful[i][source as usize]
                    && self.expand[i][source as usize]
                    && layers[i][source as usize].is_some_and(|c| c.cmp(&Cost::START) == Ordering::Equal)
            })
            .collect();
        let mut ids = vec![source];
        let mut history: Vec<Vec<usize>> = Vec::new();
        loop {
            if frontier.is_empty() {
                return None;
            }
            let current = *ids.last()?;
            if frontier.iter().any(|&i| is_end(i, current)) {
                history.push(frontier);
                break;
            }
            let mut next: Vec<(VertexId, usize)> = Vec::new();
            for &i in &frontier {
                for entry in self.snapshots[i].out_neighbors(current) {
                    let v = entry.neighbor;
                    if useful[i][v as usize] && self.tight_step(layers, i, current, v, entry.weight) {
                        next.push((v, i));
                    }
                }
                if i + 1 < layers.len() && useful[i + 1][current as usize] && self.tight_handoff(layers, i, current) {
                    next.push((current, i + 1));
                }
            }
            let min_id = next.iter().map(|(v, _)| *v).min()?;
            let mut layers_next: Vec<usize> = next.into_iter().filter(|(v, _)| *v == min_id).map(|(_, i)| i).collect();
            layers_next.sort_unstable();
            layers_next.dedup();
            history.push(frontier);
            frontier = layers_next;
            ids.push(min_id);
        }

        // Walk back choosing the earliest layer at every step.
        let last = history.len() - 1;
        let mut layer = *history[last].iter().find(|&&i| is_end(i, target))?;
        let mut states = vec![(layer, ids[last])];
        for k in (0..last).rev() {
            let (v, u) = (ids[k + 1], ids[k]);
            layer = *history[k].iter().find(|&&i| {
                if i == layer && u != v {
                    self.snapshots[i]
                        .out_neighbors(u)
                        .iter()
                        .any(|e| e.neighbor == v && self.tight_step(layers, i, u, v, e.weight))
                } else {
                    i + 1 == layer && u == v && self.tight_handoff(layers, i, u)
                }
            })?;
            states.push((layer, u));
        }
        states.reverse();
        Some(states)
    }

    fn to_segments(&self, states: &[(usize, VertexId)]) -> Vec<PathSegment> {
        let mut segments = Vec::new();
        let mut start = 0;
        for k in 1..=states.len() {
            if k == states.len() || states[k].0 != states[start].0 {
                let layer = states[start].0;
                let vertices = states[start..k].iter().map(|(_, v)| *v).collect();
                segments.push(PathSegment::from_vertices(&self.snapshots[layer], vertices, self.cost, self.scope));
                start = k;
            }
        }
        segments
    }
}

fn strict_space<'a>(
    seq: &'a SnapshotSequence,
    report: &DynamicityReport,
    subgraphs: Option<&[SignificantSubgraph]>,
    query: &PathQuery,
    targets: &[VertexId],
) -> StrictSpace<'a> {
    let snapshots = seq.snapshots();
    let n = seq.vertex_count();
    let mut expand = report.masks(snapshots.len(), n);
    let mut sink = vec![vec![false; n]; snapshots.len()];
    for (i, mask) in expand.iter_mut().enumerate() {
        let sub = match subgraphs {
            Some(all) => match all.iter().find(|g| g.index == i) {
                Some(g) => Some(g),
                None => {
                    // No subgraph for this snapshot: nothing is searchable.
                    mask.iter_mut().for_each(|m| *m = false);
                    continue;
                }
            },
            None => None,
        };
        if let Some(sub) = sub {
            for (v, m) in mask.iter_mut().enumerate() {
                *m = *m && sub.contains(v as VertexId);
            }
        }
        if query.exempt_targets {
            for &t in targets {
                let member = match sub {
                    Some(sub) => sub.contains(t),
                    None => snapshots[i].contains(t),
                };
                sink[i][t as usize] = member && !mask[t as usize];
            }
        }
    }
    StrictSpace { snapshots, expand, sink, cost: query.cost, scope: SegmentScope::HdvSubgraph }
}

fn strict_winners(space: &StrictSpace<'_>, report: &DynamicityReport, query: &PathQuery, targets: &[VertexId]) -> Result<Vec<TargetPaths>> {
    let layers = space.run(query.source)?;
    Ok(targets
        .iter()
        .map(|&t| TargetPaths {
            target: t,
            paths: space
                .reconstruct(&layers, query.source, t)
                .map(|states| Chronopath::assemble(space.to_segments(&states), report, query.lambda))
                .into_iter()
                .collect(),
        })
        .collect())
}

/// Strict query: per target the minimum-length chronopath over consecutive
/// snapshots whose every vertex is highly dynamic in its snapshot and lies in
/// that snapshot's significant subgraph.
pub fn find_chronopath(
    seq: &SnapshotSequence,
    subgraphs: &[SignificantSubgraph],
    report: &DynamicityReport,
    query: &PathQuery,
) -> Result<QueryResult> {
    let targets = query.check(seq.vertex_count())?;
    if !report.is_ever_hdv(query.source) {
        return Err(Error::SourceNeverDynamic(query.source));
    }
    let space = strict_space(seq, report, Some(subgraphs), query, &targets);
    let results = strict_winners(&space, report, query, &targets)?;
    Ok(QueryResult { query: PathQuery { mode: PathMode::Strict, ..query.clone() }, results })
}

// ---------------------------------------------------------------------------
// Relaxed search

/// Reverse shortest-path trees towards a fixed target set, reusable across
/// relaxed queries from different sources.
pub struct RelaxedSearch<'a> {
    seq: &'a SnapshotSequence,
    report: &'a DynamicityReport,
    cost: CostMode,
    /// `reverse[t][i]`: distances to target `t` in snapshot `i`.
    reverse: BTreeMap<VertexId, Vec<ShortestPathTree>>,
    handoffs: Vec<Vec<VertexId>>,
}

impl<'a> RelaxedSearch<'a> {
    pub fn new(seq: &'a SnapshotSequence, report: &'a DynamicityReport, targets: &[VertexId], cost: CostMode) -> Result<Self> {
        let mut reverse = BTreeMap::new();
        for &t in targets {
            if t as usize >= seq.vertex_count() {
                return Err(Error::VertexOutOfRange(t));
            }
            if reverse.contains_key(&t) {
                continue;
            }
            let trees = seq
                .snapshots()
                .iter()
                .map(|s| sssp(SearchGraph::full(s).reversed().with_cost(cost), t))
                .collect::<Result<Vec<_>>>()?;
            reverse.insert(t, trees);
        }
        let len = seq.len();
        // Handoff candidates for the snapshot pair (i, j) are HDV_i ∪ HDV_j.
        let handoffs = (0..len).map(|i| report.hdv_set(i).to_vec()).collect();
        Ok(Self { seq, report, cost, reverse, handoffs })
    }

    pub fn query(&self, query: &PathQuery) -> Result<QueryResult> {
        let targets = query.check(self.seq.vertex_count())?;
        if let Some(&t) = targets.iter().find(|t| !self.reverse.contains_key(t)) {
            return Err(Error::InvalidConfig(format!("target {t} was not prepared for this search")));
        }
        let snapshots = self.seq.snapshots();
        let forward = snapshots
            .iter()
            .map(|s| sssp(SearchGraph::full(s).with_cost(self.cost), query.source))
            .collect::<Result<Vec<_>>>()?;

        let strict = if self.report.is_ever_hdv(query.source) {
            let strict_query = PathQuery { cost: self.cost, ..query.clone() };
            let space = strict_space(self.seq, self.report, None, &strict_query, &targets);
            Some(strict_winners(&space, self.report, &strict_query, &targets)?)
        } else {
            None
        };

        let mut results = Vec::with_capacity(targets.len());
        for (k, &t) in targets.iter().enumerate() {
            let strict_path = strict.as_ref().and_then(|s| s[k].paths.first().cloned());
            results.push(TargetPaths { target: t, paths: self.candidates(query, &forward, t, strict_path) });
        }
        Ok(QueryResult { query: PathQuery { mode: PathMode::Relaxed, cost: self.cost, ..query.clone() }, results })
    }

    fn segment(&self, i: usize, vertices: Vec<VertexId>) -> PathSegment {
        PathSegment::from_vertices(&self.seq.snapshots()[i], vertices, self.cost, SegmentScope::FullSnapshot)
    }

    fn candidates(&self, query: &PathQuery, forward: &[ShortestPathTree], t: VertexId, strict: Option<Chronopath>) -> Vec<Chronopath> {
        let q = query.source;
        let lambda = query.lambda;
        let limit = query.max_candidates;
        let mut pool = CandidatePool::new(limit);

        if q == t {
            let snapshot = (0..self.seq.len())
                .find(|&i| self.report.is_hdv(i, q))
                .or_else(|| (0..self.seq.len()).find(|&i| self.seq.snapshots()[i].contains(q)))
                .unwrap_or(0);
            pool.offer(Chronopath::assemble(vec![self.segment(snapshot, vec![q])], self.report, lambda));
            if let Some(p) = strict {
                pool.offer(p);
            }
            return pool.finish();
        }

        let reverse = &self.reverse[&t];
        for (i, tree) in forward.iter().enumerate() {
            if let Some(path) = tree.path_to(t) {
                pool.offer(Chronopath::assemble(vec![self.segment(i, path)], self.report, lambda));
            }
        }
        for i in 0..forward.len() {
            for j in i + 1..forward.len() {
                let mut hs: Vec<VertexId> = self.handoffs[i].iter().chain(self.handoffs[j].iter()).copied().collect();
                hs.sort_unstable();
                hs.dedup();
                for h in hs {
                    if h == q || h == t {
                        continue;
                    }
                    let (Some(a), Some(b)) = (forward[i].distance(h), reverse[j].distance(h)) else {
                        continue;
                    };
                    if !pool.may_admit(score_parts(1.0, a + b, lambda)) {
                        continue;
                    }
                    let (Some(first), Some(second)) = (forward[i].path_to(h), reverse[j].walk_to_source(h)) else {
                        continue;
                    };
                    let path = Chronopath::assemble(vec![self.segment(i, first), self.segment(j, second)], self.report, lambda);
                    pool.offer(path);
                }
            }
        }
        if let Some(p) = strict {
            pool.offer(p);
        }
        pool.finish()
    }
}

/// Relaxed query over whole snapshots with snapshot skipping. Candidates per
/// target:
///
/// * the single-segment shortest path in every snapshot,
/// * two-segment paths `S_i -> h -> S_j` (`i < j`) through a handoff `h`
///   that is highly dynamic in `S_i` or `S_j`,
/// * the strict winner, when the source is ever highly dynamic.
///
/// Candidates are ranked by significance (desc), total length (asc), then
/// vertex and snapshot sequence.
pub fn find_relaxed_chronopath(seq: &SnapshotSequence, report: &DynamicityReport, query: &PathQuery) -> Result<QueryResult> {
    let targets = query.check(seq.vertex_count())?;
    RelaxedSearch::new(seq, report, &targets, query.cost)?.query(query)
}

fn rank(a: &Chronopath, b: &Chronopath) -> Ordering {
    b.significance
        .total_cmp(&a.significance)
        .then(a.total_length.total_cmp(&b.total_length))
        .then_with(|| a.vertex_sequence().cmp(&b.vertex_sequence()))
        .then_with(|| a.snapshot_sequence().cmp(&b.snapshot_sequence()))
}

struct CandidatePool {
    limit: usize,
    items: Vec<Chronopath>,
    /// Min-heap of admitted scores, used as a pruning bound.
    scores: BinaryHeap<Reverse<OrdF64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl CandidatePool {
    fn new(limit: usize) -> Self {
        Self { limit, items: Vec::new(), scores: BinaryHeap::new() }
    }

    fn may_admit(&self, upper_bound: f64) -> bool {
        self.scores.len() < self.limit || self.scores.peek().is_none_or(|Reverse(min)| upper_bound >= min.0)
    }

    fn offer(&mut self, path: Chronopath) {
        if !self.may_admit(path.significance) {
            return;
        }
        let key = (path.snapshot_sequence(), path.vertex_sequence());
        if self.items.iter().any(|p| (p.snapshot_sequence(), p.vertex_sequence()) == key) {
            return;
        }
        self.scores.push(Reverse(OrdF64(path.significance)));
        if self.scores.len() > self.limit {
            self.scores.pop();
        }
        self.items.push(path);
    }

    fn finish(mut self) -> Vec<Chronopath> {
        self.items.sort_by(rank);
        self.items.truncate(self.limit);
        self.items
    }
}
