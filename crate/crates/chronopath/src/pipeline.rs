//! Full analysis run: snapshots, dynamicity, subgraphs, paths, patterns and
//! metrics, with per-snapshot work spread over a fixed-size worker pool.
//!
//! Every parallel stage collects into index order, so the bundle does not
//! depend on the worker count.

use std::time::Instant;

use chronopath_core::chronopath::{find_chronopath, Chronopath, PathMode, PathQuery, QueryResult, RelaxedSearch, DEFAULT_LAMBDA};
use chronopath_core::dynamicity::{
    baseline_hdv_degree, score_snapshot_pair, DynamicityConfig, DynamicityReport, HarmonicDegreeMetric,
};
use chronopath_core::graph::TemporalGraph;
use chronopath_core::kcore::{core_decomposition, significant_subgraph, SignificantSubgraph};
use chronopath_core::metrics::{avg_path_length, coverage_rate};
use chronopath_core::patterns::{extract_frequent_edges, PatternOptions};
use chronopath_core::snapshot::{plan_snapshots, Snapshot, SnapshotSequence};
use chronopath_core::sssp::CostMode;
use chronopath_core::{Timestamp, VertexId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EvalReport, EvalSummary};
use crate::export::{DynamicityExport, PatternsExport, QueryExport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedQuery {
    /// External vertex label.
    pub source: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum QuerySpec {
    /// Every vertex of the HDV union is a source once; the targets are one
    /// seeded uniform sample of all vertices, shared by every query.
    EachHdvToSampledTargets { sample_size: usize, seed: u64 },
    FixedQueryList { queries: Vec<FixedQuery> },
}

impl Default for QuerySpec {
    fn default() -> Self {
        QuerySpec::EachHdvToSampledTargets { sample_size: 10, seed: 7 }
    }
}

/// Everything that determines the contents of a result bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisParams {
    pub intervals: usize,
    pub w1: f64,
    pub w2: f64,
    pub theta: f64,
    /// Degree-centrality threshold of the baseline.
    pub tau: f64,
    /// Restrict strict search to the significant subgraphs.
    pub subgraphs: bool,
    pub mode: PathMode,
    pub queries: QuerySpec,
    pub lambda: f64,
    pub max_candidates: usize,
    pub cost: CostMode,
    /// Strict mode: targets need not be highly dynamic themselves.
    pub exempt_targets: bool,
    pub pattern_threshold: usize,
    pub strictly_greater: bool,
    pub snapshot_agnostic: bool,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        let d = DynamicityConfig::default();
        Self {
            intervals: 10,
            w1: d.w1,
            w2: d.w2,
            theta: d.theta,
            tau: 0.1,
            subgraphs: true,
            mode: PathMode::Strict,
            queries: QuerySpec::default(),
            lambda: DEFAULT_LAMBDA,
            max_candidates: 4,
            cost: CostMode::Weight,
            exempt_targets: true,
            pattern_threshold: 2,
            strictly_greater: false,
            snapshot_agnostic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

fn unit(field: &str, value: f64, errors: &mut Vec<FieldError>) {
    if !(0.0..=1.0).contains(&value) {
        errors.push(FieldError { field: field.into(), message: format!("must lie in [0, 1] (got {value})") });
    }
}

impl AnalysisParams {
    pub fn dynamicity(&self) -> DynamicityConfig {
        DynamicityConfig { w1: self.w1, w2: self.w2, theta: self.theta, ..Default::default() }
    }

    pub fn pattern_options(&self) -> PatternOptions {
        PatternOptions { snapshot_agnostic: self.snapshot_agnostic, strictly_greater: self.strictly_greater }
    }

    /// Field-level problems; empty when valid. With a graph, fixed query
    /// labels are checked too.
    pub fn validate(&self, graph: Option<&TemporalGraph>) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut push = |field: &str, message: String| errors.push(FieldError { field: field.into(), message });
        if self.intervals == 0 {
            push("intervals", "must be at least 1".into());
        }
        if (self.w1 + self.w2 - 1.0).abs() > 1e-9 {
            push("w1", format!("w1 + w2 must equal 1 (got {})", self.w1 + self.w2));
        }
        if self.max_candidates == 0 {
            push("max_candidates", "must be at least 1".into());
        }
        if self.pattern_threshold == 0 {
            push("pattern_threshold", "must be at least 1".into());
        }
        match &self.queries {
            QuerySpec::EachHdvToSampledTargets { sample_size, .. } if *sample_size == 0 => {
                push("queries.sample_size", "must be at least 1".into())
            }
            QuerySpec::FixedQueryList { queries } if queries.is_empty() => push("queries.queries", "must not be empty".into()),
            QuerySpec::FixedQueryList { queries } => {
                if let Some(g) = graph {
                    for (i, q) in queries.iter().enumerate() {
                        for label in std::iter::once(&q.source).chain(&q.targets) {
                            if g.vertex_by_label(label).is_none() {
                                push(&format!("queries.queries[{i}]"), format!("unknown vertex label `{label}`"));
                            }
                        }
                        if q.targets.is_empty() {
                            push(&format!("queries.queries[{i}].targets"), "must not be empty".into());
                        }
                    }
                }
            }
            _ => {}
        }
        for (field, value) in [("w1", self.w1), ("w2", self.w2), ("theta", self.theta), ("tau", self.tau), ("lambda", self.lambda)] {
            unit(field, value, &mut errors);
        }
        errors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(flatten)]
    pub params: AnalysisParams,
    #[serde(default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { params: AnalysisParams::default(), workers: 1 }
    }
}

impl PipelineConfig {
    pub fn validate(&self, graph: Option<&TemporalGraph>) -> Vec<FieldError> {
        let mut errors = self.params.validate(graph);
        if self.workers == 0 {
            errors.push(FieldError { field: "workers".into(), message: "must be at least 1".into() });
        }
        errors
    }
}

/// Worker pool wrapper. All stage functions run inside the pool.
pub struct Engine {
    pool: ThreadPool,
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn snapshots(&self, graph: &TemporalGraph, intervals: usize) -> Result<SnapshotSequence> {
        let boundaries = plan_snapshots(graph, intervals)?;
        let snapshots = self.install(|| {
            boundaries
                .par_iter()
                .enumerate()
                .map(|(i, &b)| Snapshot::build(graph, i, b))
                .collect()
        });
        Ok(SnapshotSequence::from_snapshots(snapshots))
    }

    pub fn dynamicity(&self, seq: &SnapshotSequence, config: &DynamicityConfig) -> Result<DynamicityReport> {
        config.validate()?;
        if seq.len() < 2 {
            return Err(chronopath_core::Error::TooFewSnapshots(seq.len()).into());
        }
        let metric = HarmonicDegreeMetric { config: *config };
        let snaps = seq.snapshots();
        let scores = self.install(|| {
            (1..snaps.len())
                .into_par_iter()
                .map(|i| score_snapshot_pair(&snaps[i - 1], &snaps[i], &metric))
                .collect()
        });
        Ok(DynamicityReport::from_scores(scores, config.theta))
    }

    pub fn subgraphs(&self, seq: &SnapshotSequence, report: &DynamicityReport) -> Vec<SignificantSubgraph> {
        self.install(|| {
            seq.snapshots()
                .par_iter()
                .map(|s| significant_subgraph(s, &core_decomposition(s), report.hdv_set(s.index())))
                .collect()
        })
    }

    /// Runs every planned query. Strict queries from a source that is never
    /// dynamic yield empty results instead of failing the batch.
    pub fn queries(
        &self,
        seq: &SnapshotSequence,
        report: &DynamicityReport,
        subgraphs: &[SignificantSubgraph],
        plan: &[(VertexId, Vec<VertexId>)],
        params: &AnalysisParams,
    ) -> Result<Vec<QueryResult>> {
        let make = |source: VertexId, targets: &[VertexId]| PathQuery {
            lambda: params.lambda,
            max_candidates: params.max_candidates,
            cost: params.cost,
            exempt_targets: params.exempt_targets,
            ..PathQuery::new(source, targets.to_vec(), params.mode)
        };
        self.install(|| match params.mode {
            PathMode::Strict => plan
                .par_iter()
                .map(|(q, targets)| {
                    let query = make(*q, targets);
                    match find_chronopath(seq, subgraphs, report, &query) {
                        Err(chronopath_core::Error::SourceNeverDynamic(_)) => Ok(QueryResult::empty(query)),
                        other => other.map_err(Error::from),
                    }
                })
                .collect(),
            PathMode::Relaxed => {
                // Sampled plans share one target list, so one search serves all.
                let mut all_targets: Vec<VertexId> = plan.iter().flat_map(|(_, t)| t.iter().copied()).collect();
                all_targets.sort_unstable();
                all_targets.dedup();
                let search = RelaxedSearch::new(seq, report, &all_targets, params.cost)?;
                plan.par_iter().map(|(q, targets)| search.query(&make(*q, targets)).map_err(Error::from)).collect()
            }
        })
    }
}

/// Sources and targets per the query rule. `sources` is the HDV oracle's
/// vertex set (engine union or baseline set).
pub fn plan_queries(graph: &TemporalGraph, sources: &[VertexId], spec: &QuerySpec) -> Result<Vec<(VertexId, Vec<VertexId>)>> {
    match spec {
        QuerySpec::EachHdvToSampledTargets { sample_size, seed } => {
            let targets = sample_targets(graph.vertex_count(), *sample_size, *seed);
            Ok(sources.iter().map(|&q| (q, targets.clone())).collect())
        }
        QuerySpec::FixedQueryList { queries } => queries
            .iter()
            .map(|fq| {
                let id = |label: &String| {
                    graph.vertex_by_label(label).ok_or_else(|| Error::Invalid(format!("unknown vertex label `{label}`")))
                };
                Ok((id(&fq.source)?, fq.targets.iter().map(id).collect::<Result<_>>()?))
            })
            .collect(),
    }
}

/// `min(size, n)` distinct vertices, ascending, fixed by `seed`.
pub fn sample_targets(n: usize, size: usize, seed: u64) -> Vec<VertexId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<VertexId> = rand::seq::index::sample(&mut rng, n, size.min(n))
        .into_iter()
        .map(|v| v as VertexId)
        .collect();
    picked.sort_unstable();
    picked
}

/// The best path per `(query, target)`, in query then target order.
pub fn representatives(results: &[QueryResult]) -> Vec<(usize, VertexId, &Chronopath)> {
    results
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.results.iter().filter_map(move |t| t.paths.first().map(|p| (i, t.target, p))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub vertices: usize,
    pub edges: usize,
    pub t_min: Timestamp,
    pub t_max: Timestamp,
    pub directed: bool,
}

impl From<&TemporalGraph> for DatasetSummary {
    fn from(g: &TemporalGraph) -> Self {
        Self { vertices: g.vertex_count(), edges: g.edge_count(), t_min: g.t_min(), t_max: g.t_max(), directed: g.is_directed() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub index: usize,
    pub boundary: Timestamp,
    pub vertices: usize,
    pub edges: usize,
    pub hdv_count: usize,
}

/// Identifies a representative path; pattern `path_ids` index this list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRef {
    pub query: usize,
    pub target: VertexId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub dataset: DatasetSummary,
    pub params: AnalysisParams,
    pub snapshots: Vec<SnapshotSummary>,
    pub dynamicity: DynamicityExport,
    pub subgraphs: Vec<SignificantSubgraph>,
    pub queries: Vec<QueryExport>,
    pub path_refs: Vec<PathRef>,
    pub patterns: PatternsExport,
    pub evaluation: EvalReport,
}

/// Stage progress sink.
pub trait Progress {
    fn log(&mut self, line: String);
}

impl<F: FnMut(String)> Progress for F {
    fn log(&mut self, line: String) {
        self(line)
    }
}

fn timed<T>(log: &mut dyn Progress, stage: &str, f: impl FnOnce() -> Result<T>, detail: impl FnOnce(&T) -> String) -> Result<T> {
    log.log(format!("stage {stage}: started"));
    let start = Instant::now();
    match f() {
        Ok(v) => {
            log.log(format!("stage {stage}: done in {} ms, {}", start.elapsed().as_millis(), detail(&v)));
            Ok(v)
        }
        Err(e) => {
            log.log(format!("stage {stage}: failed: {e}"));
            Err(e)
        }
    }
}

/// Placeholder subgraphs that admit every vertex, used when subgraph
/// restriction is switched off.
fn unrestricted(seq: &SnapshotSequence) -> Vec<SignificantSubgraph> {
    let all: Vec<VertexId> = (0..seq.vertex_count() as VertexId).collect();
    seq.snapshots()
        .iter()
        .map(|s| SignificantSubgraph { index: s.index(), k_star: None, vertices: all.clone(), edges: Vec::new() })
        .collect()
}

/// Subgraphs, queries and summary for one HDV oracle.
pub struct MethodRun {
    pub report: DynamicityReport,
    pub subgraphs: Vec<SignificantSubgraph>,
    pub results: Vec<QueryResult>,
    pub summary: EvalSummary,
}

pub fn run_method(
    engine: &Engine,
    graph: &TemporalGraph,
    seq: &SnapshotSequence,
    method: &str,
    report: DynamicityReport,
    hdv_count: usize,
    sources: &[VertexId],
    params: &AnalysisParams,
) -> Result<MethodRun> {
    let subgraphs = if params.subgraphs { engine.subgraphs(seq, &report) } else { unrestricted(seq) };
    let plan = plan_queries(graph, sources, &params.queries)?;
    let results = engine.queries(seq, &report, &subgraphs, &plan, params)?;
    let summary = summarize(method, hdv_count, &results, graph.vertex_count());
    Ok(MethodRun { report, subgraphs, results, summary })
}

pub fn summarize(method: &str, hdv_count: usize, results: &[QueryResult], vertex_count: usize) -> EvalSummary {
    let reps: Vec<&Chronopath> = representatives(results).into_iter().map(|(_, _, p)| p).collect();
    EvalSummary {
        method: method.into(),
        hdv_count,
        coverage_rate: coverage_rate(reps.iter().copied(), vertex_count),
        avg_path_length: avg_path_length(reps.iter().copied()),
        queries: results.len(),
        paths: reps.len(),
    }
}

pub const ENGINE_METHOD: &str = "dynamicity";
pub const BASELINE_METHOD: &str = "degree-centrality";

pub fn baseline_report(seq: &SnapshotSequence, tau: f64) -> Result<(Vec<VertexId>, DynamicityReport)> {
    let set = baseline_hdv_degree(seq, tau)?;
    let report = DynamicityReport::uniform(&set, seq.len());
    Ok((set, report))
}

/// Stages in order: snapshots, dynamicity, subgraphs, paths, patterns,
/// metrics. Each stage logs a start and an end line.
pub fn run_pipeline(graph: &TemporalGraph, config: &PipelineConfig, log: &mut dyn Progress) -> Result<ResultBundle> {
    let errors = config.validate(Some(graph));
    if let Some(e) = errors.first() {
        let err = Error::Invalid(format!("{}: {}", e.field, e.message));
        log.log(format!("stage config: failed: {err}"));
        return Err(err);
    }
    let params = &config.params;
    let engine = Engine::new(config.workers)?;
    log.log(format!(
        "pipeline: {} vertices, {} edges, {} intervals, {} workers",
        graph.vertex_count(),
        graph.edge_count(),
        params.intervals,
        engine.workers()
    ));

    let seq = timed(log, "snapshots", || engine.snapshots(graph, params.intervals), |s| format!("{} snapshots", s.len()))?;
    let report = timed(log, "dynamicity", || engine.dynamicity(&seq, &params.dynamicity()), |r| {
        format!("{} highly dynamic vertices", r.union_hdv.len())
    })?;
    let subgraphs = timed(
        log,
        "subgraphs",
        || Ok(if params.subgraphs { engine.subgraphs(&seq, &report) } else { unrestricted(&seq) }),
        |s| if params.subgraphs { format!("{} subgraphs", s.len()) } else { "disabled".into() },
    )?;
    let sources = report.union_hdv.clone();
    let results = timed(
        log,
        "paths",
        || {
            let plan = plan_queries(graph, &sources, &params.queries)?;
            engine.queries(&seq, &report, &subgraphs, &plan, params)
        },
        |r| format!("{} queries, {} paths", r.len(), representatives(r).len()),
    )?;
    let reps = representatives(&results);
    let patterns = timed(
        log,
        "patterns",
        || {
            let paths: Vec<Chronopath> = reps.iter().map(|(_, _, p)| (*p).clone()).collect();
            let found = extract_frequent_edges(&paths, params.pattern_threshold, params.pattern_options())?;
            Ok(PatternsExport::new(params.pattern_threshold, params.pattern_options(), &found))
        },
        |p| format!("{} patterns", p.patterns.len()),
    )?;
    let evaluation = timed(
        log,
        "metrics",
        || {
            let engine_summary = summarize(ENGINE_METHOD, report.union_hdv.len(), &results, graph.vertex_count());
            let (set, base_report) = baseline_report(&seq, params.tau)?;
            let baseline = run_method(&engine, graph, &seq, BASELINE_METHOD, base_report, set.len(), &set, params)?;
            Ok(EvalReport { params: params.clone(), engine: engine_summary, baseline: baseline.summary, baseline_hdv: set })
        },
        |e| format!("coverage {:.3} vs {:.3}", e.engine.coverage_rate, e.baseline.coverage_rate),
    )?;

    let snapshots = seq
        .snapshots()
        .iter()
        .map(|s| SnapshotSummary {
            index: s.index(),
            boundary: s.boundary(),
            vertices: (0..s.vertex_count() as VertexId).filter(|&v| s.contains(v)).count(),
            edges: s.edge_count(),
            hdv_count: report.hdv_set(s.index()).len(),
        })
        .collect();
    let path_refs = reps.iter().map(|&(query, target, _)| PathRef { query, target }).collect();
    Ok(ResultBundle {
        dataset: DatasetSummary::from(graph),
        params: params.clone(),
        snapshots,
        dynamicity: DynamicityExport::from(&report),
        subgraphs: if params.subgraphs { subgraphs } else { Vec::new() },
        queries: results.iter().map(QueryExport::from).collect(),
        path_refs,
        patterns,
        evaluation,
    })
}
