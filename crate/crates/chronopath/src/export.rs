//! JSON documents consumed by the dashboard and by downstream tools.

use std::collections::BTreeMap;

use chronopath_core::chronopath::{Chronopath, PathMode, QueryResult};
use chronopath_core::dynamicity::DynamicityReport;
use chronopath_core::graph::TemporalGraph;
use chronopath_core::patterns::{FrequentEdgePattern, PatternEdge, PatternOptions, PatternSubgraph};
use chronopath_core::snapshot::{snapshot_view, EdgeView, SnapshotSequence};
use chronopath_core::sssp::CostMode;
use chronopath_core::{Timestamp, VertexId};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexExport {
    pub id: VertexId,
    pub label: String,
    pub degree: u32,
    pub out_degree: u32,
    pub in_degree: u32,
}

/// `{index, boundary, vertices:[{id,label,degree}], edges:[{src,dst,weight,multiplicity}]}`
/// plus the snapshot's HDV list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotExport {
    pub index: usize,
    pub boundary: Timestamp,
    pub vertices: Vec<VertexExport>,
    pub edges: Vec<EdgeView>,
    pub hdv: Vec<VertexId>,
}

pub fn snapshot_export(
    graph: &TemporalGraph,
    seq: &SnapshotSequence,
    index: usize,
    report: Option<&DynamicityReport>,
) -> Result<SnapshotExport> {
    let view = snapshot_view(seq, index)?;
    let vertices = view
        .vertices
        .into_iter()
        .map(|v| VertexExport {
            id: v.id,
            label: graph.label(v.id).unwrap_or_default().to_owned(),
            degree: v.degree,
            out_degree: v.out_degree,
            in_degree: v.in_degree,
        })
        .collect();
    let hdv = report.map(|r| r.hdv_set(index).to_vec()).unwrap_or_default();
    Ok(SnapshotExport { index, boundary: view.boundary, vertices, edges: view.edges, hdv })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHdvExport {
    pub index: usize,
    pub hdv: Vec<VertexId>,
    pub scores: BTreeMap<VertexId, f64>,
}

/// `{per_snapshot:[{index, hdv, scores:{id:score}}], union_hdv}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicityExport {
    pub per_snapshot: Vec<SnapshotHdvExport>,
    pub union_hdv: Vec<VertexId>,
}

impl From<&DynamicityReport> for DynamicityExport {
    fn from(r: &DynamicityReport) -> Self {
        Self {
            per_snapshot: r
                .per_snapshot
                .iter()
                .map(|s| SnapshotHdvExport { index: s.index, hdv: s.hdv.clone(), scores: s.scores.iter().copied().collect() })
                .collect(),
            union_hdv: r.union_hdv.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryParams {
    pub lambda: f64,
    pub max_candidates: usize,
    pub cost: CostMode,
    pub exempt_targets: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEcho {
    pub q: VertexId,
    pub targets: Vec<VertexId>,
    pub mode: PathMode,
    pub params: QueryParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentExport {
    pub snapshot: usize,
    pub vertices: Vec<VertexId>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathExport {
    pub segments: Vec<SegmentExport>,
    pub total_length: f64,
    pub hdv_fraction: f64,
    pub significance: f64,
}

impl From<&Chronopath> for PathExport {
    fn from(p: &Chronopath) -> Self {
        Self {
            segments: p
                .segments
                .iter()
                .map(|s| SegmentExport { snapshot: s.snapshot, vertices: s.vertices.clone(), length: s.length })
                .collect(),
            total_length: p.total_length,
            hdv_fraction: p.hdv_fraction,
            significance: p.significance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetExport {
    pub target: VertexId,
    pub paths: Vec<PathExport>,
}

/// `{query:{q,targets,mode,params}, results:[{target, paths:[...]}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryExport {
    pub query: QueryEcho,
    pub results: Vec<TargetExport>,
}

impl From<&QueryResult> for QueryExport {
    fn from(r: &QueryResult) -> Self {
        let q = &r.query;
        Self {
            query: QueryEcho {
                q: q.source,
                targets: q.targets.clone(),
                mode: q.mode,
                params: QueryParams {
                    lambda: q.lambda,
                    max_candidates: q.max_candidates,
                    cost: q.cost,
                    exempt_targets: q.exempt_targets,
                },
            },
            results: r
                .results
                .iter()
                .map(|t| TargetExport { target: t.target, paths: t.paths.iter().map(PathExport::from).collect() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternExport {
    pub edge: PatternEdge,
    pub frequency: usize,
    pub path_ids: Vec<usize>,
    pub subgraph: PatternSubgraph,
}

/// `{threshold, patterns:[{edge:{src,dst,snapshot}, frequency, path_ids, subgraph:{vertices,edges}}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternsExport {
    pub threshold: usize,
    pub strictly_greater: bool,
    pub snapshot_agnostic: bool,
    pub patterns: Vec<PatternExport>,
}

impl PatternsExport {
    pub fn new(threshold: usize, options: PatternOptions, patterns: &[FrequentEdgePattern]) -> Self {
        Self {
            threshold,
            strictly_greater: options.strictly_greater,
            snapshot_agnostic: options.snapshot_agnostic,
            patterns: patterns
                .iter()
                .map(|p| PatternExport {
                    edge: p.edge,
                    frequency: p.frequency,
                    path_ids: p.member_paths.clone(),
                    subgraph: p.subgraph.clone(),
                })
                .collect(),
        }
    }
}
