//! Timestamped edge multiset with dense vertex ids.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Timestamp, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub weight: f64,
    /// Weight as it appeared in the source file, kept when a signed-weight
    /// policy rewrote it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_weight: Option<f64>,
}

impl TemporalEdge {
    pub fn new(src: VertexId, dst: VertexId, t_start: Timestamp, t_end: Timestamp, weight: f64) -> Self {
        Self { src, dst, t_start, t_end, weight, raw_weight: None }
    }

    /// Single-timestamp record: `t_start = t_end = t`.
    pub fn instant(src: VertexId, dst: VertexId, t: Timestamp, weight: f64) -> Self {
        Self::new(src, dst, t, t, weight)
    }

    /// Canonical edge order: `t_end`, then `(t_start, src, dst)`, then weight.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        (self.t_end, self.t_start, self.src, self.dst)
            .cmp(&(other.t_end, other.t_start, other.src, other.dst))
            .then_with(|| self.weight.total_cmp(&other.weight))
    }

    /// Identity used for distinct-edge counting.
    pub fn key(&self) -> (VertexId, VertexId, Timestamp, Timestamp, u64) {
        (self.src, self.dst, self.t_start, self.t_end, self.weight.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalGraph {
    labels: Vec<String>,
    edges: Vec<TemporalEdge>,
    t_min: Timestamp,
    t_max: Timestamp,
    directed: bool,
}

impl TemporalGraph {
    /// Builds a graph from labels (index = dense id) and edges.
    ///
    /// Edges are sorted into canonical order and the time span recomputed.
    /// Nothing else is checked here; run [`TemporalGraph::validate`] on
    /// graphs that did not come from a parser.
    pub fn from_parts(labels: Vec<String>, mut edges: Vec<TemporalEdge>, directed: bool) -> Self {
        edges.sort_by(TemporalEdge::canonical_cmp);
        let t_min = edges.iter().map(|e| e.t_start).min().unwrap_or(0);
        let t_max = edges.iter().map(|e| e.t_end).max().unwrap_or(0);
        Self { labels, edges, t_min, t_max, directed }
    }

    /// Graph whose labels are the decimal ids `0..vertex_count`.
    pub fn with_numeric_labels(vertex_count: usize, edges: Vec<TemporalEdge>, directed: bool) -> Self {
        let labels = (0..vertex_count).map(|i| alloc::format!("{i}")).collect();
        Self::from_parts(labels, edges, directed)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.get(v as usize).map(String::as_str)
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label).map(|i| i as VertexId)
    }

    pub fn t_min(&self) -> Timestamp {
        self.t_min
    }

    pub fn t_max(&self) -> Timestamp {
        self.t_max
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of distinct `(src, dst, t_start, t_end, weight)` edges.
    pub fn distinct_edge_count(&self) -> usize {
        // Canonical order puts identical edges next to each other.
        let mut count = 0;
        let mut prev = None;
        for e in &self.edges {
            let key = e.key();
            if prev != Some(key) {
                count += 1;
                prev = Some(key);
            }
        }
        count
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.vertex_count();
        let mut violations = Vec::new();
        let mut touched = alloc::vec![false; n];
        for (i, e) in self.edges.iter().enumerate() {
            if e.t_start > e.t_end {
                violations.push(Violation::StartAfterEnd { edge: i, t_start: e.t_start, t_end: e.t_end });
            }
            if !(e.weight >= 0.0) {
                violations.push(Violation::NegativeWeight { edge: i, weight: e.weight });
            }
            for v in [e.src, e.dst] {
                match touched.get_mut(v as usize) {
                    Some(t) => *t = true,
                    None => violations.push(Violation::UnknownVertex { edge: i, vertex: v }),
                }
            }
        }
        for (i, pair) in self.edges.windows(2).enumerate() {
            if pair[0].canonical_cmp(&pair[1]) == Ordering::Greater {
                violations.push(Violation::Unsorted { edge: i + 1 });
            }
        }
        if !self.edges.is_empty() {
            let t_min = self.edges.iter().map(|e| e.t_start).min().unwrap_or(0);
            let t_max = self.edges.iter().map(|e| e.t_end).max().unwrap_or(0);
            if t_min != self.t_min || t_max != self.t_max {
                violations.push(Violation::SpanMismatch {
                    stored: (self.t_min, self.t_max),
                    actual: (t_min, t_max),
                });
            }
        }

        let mut pairs: Vec<(VertexId, VertexId)> = self.edges.iter().map(|e| (e.src, e.dst)).collect();
        pairs.sort_unstable();
        let distinct_pairs = pairs.windows(2).filter(|w| w[0] != w[1]).count() + usize::from(!pairs.is_empty());

        ValidationReport {
            vertex_count: n,
            edge_count: self.edges.len(),
            t_min: (!self.edges.is_empty()).then_some(self.t_min),
            t_max: (!self.edges.is_empty()).then_some(self.t_max),
            multi_edge_count: pairs.len() - distinct_pairs,
            isolated_vertex_count: touched.iter().filter(|t| !**t).count(),
            violations,
        }
    }
}

/// One broken graph invariant, with the offending edge position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    StartAfterEnd { edge: usize, t_start: Timestamp, t_end: Timestamp },
    NegativeWeight { edge: usize, weight: f64 },
    UnknownVertex { edge: usize, vertex: VertexId },
    Unsorted { edge: usize },
    SpanMismatch { stored: (Timestamp, Timestamp), actual: (Timestamp, Timestamp) },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::StartAfterEnd { edge, t_start, t_end } => {
                write!(f, "edge {edge}: t_start {t_start} > t_end {t_end} (requires t_start <= t_end)")
            }
            Violation::NegativeWeight { edge, weight } => write!(f, "edge {edge}: negative weight {weight}"),
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "edge {edge}: vertex {vertex} is not registered")
            }
            Violation::Unsorted { edge } => write!(f, "edge {edge}: edge list not in canonical order"),
            Violation::SpanMismatch { stored, actual } => write!(
                f,
                "stored time span {stored:?} differs from edge span {actual:?}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub t_min: Option<Timestamp>,
    pub t_max: Option<Timestamp>,
    /// Edges beyond the first for each `(src, dst)` pair.
    pub multi_edge_count: usize,
    pub isolated_vertex_count: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_edge_is_valid() {
        let g = TemporalGraph::with_numeric_labels(2, vec![TemporalEdge::instant(0, 1, 10, 1.0)], true);
        let r = g.validate();
        assert_eq!(r.vertex_count, 2);
        assert_eq!(r.edge_count, 1);
        assert!(r.is_valid());
        assert_eq!((r.t_min, r.t_max), (Some(10), Some(10)));
    }

    #[test]
    fn reports_start_after_end() {
        let g = TemporalGraph::with_numeric_labels(2, vec![TemporalEdge::new(0, 1, 5, 3, 1.0)], true);
        let r = g.validate();
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::StartAfterEnd { t_start: 5, t_end: 3, .. }));
        assert!(alloc::format!("{}", r.violations[0]).contains("t_start <= t_end"));
    }

    #[test]
    fn reports_unknown_vertex_and_negative_weight() {
        let g = TemporalGraph::with_numeric_labels(2, vec![TemporalEdge::instant(0, 7, 1, -2.0)], true);
        let r = g.validate();
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn counts_multi_edges_and_isolated() {
        let g = TemporalGraph::with_numeric_labels(
            4,
            vec![
                TemporalEdge::instant(0, 1, 1, 1.0),
                TemporalEdge::instant(0, 1, 2, 1.0),
                TemporalEdge::instant(0, 1, 2, 1.0),
                TemporalEdge::instant(1, 2, 3, 1.0),
            ],
            true,
        );
        let r = g.validate();
        assert_eq!(r.multi_edge_count, 2);
        assert_eq!(r.isolated_vertex_count, 1);
        assert_eq!(g.distinct_edge_count(), 3);
    }

    #[test]
    fn edges_sorted_canonically() {
        let g = TemporalGraph::with_numeric_labels(
            3,
            vec![
                TemporalEdge::instant(2, 1, 20, 1.0),
                TemporalEdge::new(1, 0, 5, 20, 1.0),
                TemporalEdge::instant(0, 1, 10, 1.0),
            ],
            true,
        );
        let order: Vec<_> = g.edges().iter().map(|e| (e.t_end, e.t_start)).collect();
        assert_eq!(order, vec![(10, 10), (20, 5), (20, 20)]);
        assert_eq!((g.t_min(), g.t_max()), (5, 20));
    }
}
