//! Engine-versus-baseline comparison: HDV count, coverage rate and average
//! path length under one shared query protocol.

use std::fmt::Write as _;

use chronopath_core::graph::TemporalGraph;
use chronopath_core::VertexId;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{baseline_report, run_method, AnalysisParams, Engine, BASELINE_METHOD, ENGINE_METHOD};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub dataset: String,
    #[serde(flatten)]
    pub params: AnalysisParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub method: String,
    pub hdv_count: usize,
    /// Distinct path vertices over `|V|`.
    pub coverage_rate: f64,
    /// Mean edge count, zero-length paths included.
    pub avg_path_length: f64,
    pub queries: usize,
    pub paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub params: AnalysisParams,
    pub engine: EvalSummary,
    pub baseline: EvalSummary,
    pub baseline_hdv: Vec<VertexId>,
}

impl EvalReport {
    pub fn summaries(&self) -> [&EvalSummary; 2] {
        [&self.engine, &self.baseline]
    }
}

/// Engine: detected HDVs, each one a query source. Baseline: degree
/// centrality above `tau` on the final snapshot, applied to every snapshot,
/// with the same targets.
pub fn run_protocol(graph: &TemporalGraph, protocol: &EvalProtocol, workers: usize) -> Result<EvalReport> {
    let params = &protocol.params;
    if let Some(e) = params.validate(Some(graph)).first() {
        return Err(Error::Invalid(format!("{}: {}", e.field, e.message)));
    }
    let engine = Engine::new(workers)?;
    let seq = engine.snapshots(graph, params.intervals)?;
    let report = engine.dynamicity(&seq, &params.dynamicity())?;
    let sources = report.union_hdv.clone();
    let main = run_method(&engine, graph, &seq, ENGINE_METHOD, report, sources.len(), &sources, params)?;
    let (set, base_report) = baseline_report(&seq, params.tau)?;
    let base = run_method(&engine, graph, &seq, BASELINE_METHOD, base_report, set.len(), &set, params)?;
    Ok(EvalReport { params: params.clone(), engine: main.summary, baseline: base.summary, baseline_hdv: set })
}

const HEADERS: [&str; 4] = ["Method", "HDV Count", "Coverage Rate", "Avg Path Length"];

fn cells(s: &EvalSummary) -> [String; 4] {
    [
        s.method.clone(),
        s.hdv_count.to_string(),
        format!("{:.3}", s.coverage_rate),
        format!("{:.2}", s.avg_path_length),
    ]
}

/// Aligned text table; the method column is left-aligned, numbers right.
pub fn render_comparison<'a>(summaries: impl IntoIterator<Item = &'a EvalSummary>) -> String {
    let rows: Vec<[String; 4]> = summaries.into_iter().map(cells).collect();
    let mut widths = HEADERS.map(str::len);
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |row: [&str; 4]| {
        let _ = write!(out, "{:<w$}", row[0], w = widths[0]);
        for i in 1..4 {
            let _ = write!(out, "  {:>w$}", row[i], w = widths[i]);
        }
        out.push('\n');
    };
    line(HEADERS);
    for row in &rows {
        line([&row[0], &row[1], &row[2], &row[3]]);
    }
    out
}

pub fn render_csv<'a>(summaries: impl IntoIterator<Item = &'a EvalSummary>) -> String {
    let mut out = String::from("method,hdv_count,coverage_rate,avg_path_length\n");
    for s in summaries {
        let _ = writeln!(out, "{},{},{},{}", s.method, s.hdv_count, s.coverage_rate, s.avg_path_length);
    }
    out
}
