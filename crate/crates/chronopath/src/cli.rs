//! Command-line driver. One subcommand per pipeline stage; every stage writes
//! a JSON document that the next stage accepts as `--input`.

use std::fs;
use std::path::{Path, PathBuf};

use chronopath_core::chronopath::PathMode;
use chronopath_core::graph::TemporalGraph;
use chronopath_core::patterns::extract_frequent_edges;
use chronopath_core::sssp::CostMode;
use chronopath_core::VertexId;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::eval::{render_comparison, render_csv, run_protocol, EvalProtocol};
use crate::export::{snapshot_export, DynamicityExport, PatternsExport, QueryExport, SnapshotExport};
use crate::ingest::to_canonical;
use crate::pipeline::{
    baseline_report, representatives, run_method, AnalysisParams, DatasetSummary, Engine, FixedQuery, PathRef, QuerySpec,
    SnapshotSummary, ENGINE_METHOD,
};
use crate::service::{ServiceConfig, DEFAULT_MAX_UPLOAD, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(name = "chronopath", version, about = "Temporal graph analytics: dynamic vertices, significant subgraphs, chronopaths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a dataset and report its size; optionally write the canonical form.
    Ingest {
        #[command(flatten)]
        io: IoArgs,
        /// Write the canonical edge list here.
        #[arg(long)]
        canonical: Option<PathBuf>,
    },
    /// Cumulative snapshot boundaries and sizes.
    Snapshots {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Emit the full vertex and edge lists of one snapshot.
        #[arg(long)]
        index: Option<usize>,
    },
    /// Highly dynamic vertices per snapshot.
    Hdv {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Maximal k-core significant subgraph per snapshot.
    Subgraph {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Cross-snapshot shortest paths.
    Chronopath {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Frequent edges over the chronopath results.
    Patterns {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Engine versus degree-centrality baseline.
    Eval {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// `default`, or a JSON protocol file.
        #[arg(long, default_value = "default")]
        protocol: String,
    },
    /// Run the HTTP job service.
    Serve {
        #[arg(long, env = "CHRONO_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "CHRONO_WORKSPACE", default_value = "workspace")]
        workspace: PathBuf,
        /// Dashboard assets served at `/`.
        #[arg(long = "static", env = "CHRONO_STATIC", default_value = "webui/dist")]
        static_dir: PathBuf,
        /// Upload size cap in bytes.
        #[arg(long, env = "CHRONO_MAX_UPLOAD", default_value_t = DEFAULT_MAX_UPLOAD)]
        max_upload: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Dataset file, or the JSON output of an earlier stage.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Format name, inline descriptor, or descriptor file.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub undirected: bool,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    Weight,
    Hops,
}

/// Analysis overrides. Unset flags keep the value inherited from the input
/// document, or the default.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub intervals: Option<usize>,
    #[arg(long)]
    pub w1: Option<f64>,
    #[arg(long)]
    pub w2: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Source vertex label.
    #[arg(long)]
    pub source: Option<String>,
    /// Target vertex labels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<String>>,
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Seed of the sampled query targets.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    #[arg(long, value_enum)]
    pub cost: Option<CostArg>,
    /// Strict mode: require targets to be highly dynamic too.
    #[arg(long)]
    pub strict_targets: bool,
    /// Search the whole snapshot instead of its significant subgraph.
    #[arg(long)]
    pub no_subgraphs: bool,
    #[arg(long)]
    pub strictly_greater: bool,
    #[arg(long)]
    pub snapshot_agnostic: bool,
}

impl ParamArgs {
    fn apply(&self, p: &mut AnalysisParams) -> std::result::Result<(), String> {
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { p.$g = v; })* };
        }
        set!(intervals => intervals, w1 => w1, w2 => w2, theta => theta, tau => tau, lambda => lambda,
             threshold => pattern_threshold, max_candidates => max_candidates);
        if let Some(m) = self.mode {
            p.mode = match m {
                ModeArg::Strict => PathMode::Strict,
                ModeArg::Relaxed => PathMode::Relaxed,
            };
        }
        if let Some(c) = self.cost {
            p.cost = match c {
                CostArg::Weight => CostMode::Weight,
                CostArg::Hops => CostMode::Hops,
            };
        }
        p.exempt_targets &= !self.strict_targets;
        p.subgraphs &= !self.no_subgraphs;
        p.strictly_greater |= self.strictly_greater;
        p.snapshot_agnostic |= self.snapshot_agnostic;
        match (&self.source, &self.targets) {
            (Some(source), Some(targets)) => {
                p.queries = QuerySpec::FixedQueryList {
                    queries: vec![FixedQuery { source: source.clone(), targets: targets.clone() }],
                };
            }
            (Some(_), None) => return Err("--source needs --targets".into()),
            (None, Some(_)) => return Err("--targets needs --source".into()),
            (None, None) => {
                if self.seed.is_some() || self.sample_size.is_some() {
                    let (mut size, mut seed) = match p.queries {
                        QuerySpec::EachHdvToSampledTargets { sample_size, seed } => (sample_size, seed),
                        QuerySpec::FixedQueryList { .. } => (10, 7),
                    };
                    size = self.sample_size.unwrap_or(size);
                    seed = self.seed.unwrap_or(seed);
                    p.queries = QuerySpec::EachHdvToSampledTargets { sample_size: size, seed };
                }
            }
        }
        Ok(())
    }
}

/// Where a stage's graph came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub path: PathBuf,
    pub format: String,
    pub directed: bool,
}

/// Common head of every stage document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageHead {
    pub stage: String,
    pub input: InputRef,
    pub params: AnalysisParams,
}

#[derive(Debug, Serialize)]
struct StageDoc<T: Serialize> {
    #[serde(flatten)]
    head: StageHead,
    #[serde(flatten)]
    body: T,
}

/// Process failure: usage problems exit 2, everything else 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs a parsed command. Output goes to `stdout` unless `--output` is set.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    match cli.command {
        Command::Serve { port, workspace, static_dir, max_upload } => {
            crate::service::serve_blocking(ServiceConfig { port, workspace, static_dir, max_upload })?;
            Ok(())
        }
        Command::Ingest { io, canonical } => {
            let ctx = Context::load("ingest", &io, &ParamArgs::default())?;
            if let Some(path) = canonical {
                fs::write(&path, to_canonical(&ctx.graph)).map_err(|e| Error::io(&path, e))?;
            }
            #[derive(Serialize)]
            struct Body {
                dataset: DatasetSummary,
            }
            ctx.emit(&io, stdout, Body { dataset: DatasetSummary::from(&ctx.graph) })
        }
        Command::Snapshots { io, params, index } => {
            let ctx = Context::load("snapshots", &io, &params)?;
            let seq = ctx.engine.snapshots(&ctx.graph, ctx.params.intervals)?;
            #[derive(Serialize)]
            struct Brief {
                index: usize,
                boundary: chronopath_core::Timestamp,
                vertices: usize,
                edges: usize,
            }
            #[derive(Serialize)]
            struct Body {
                snapshots: Vec<Brief>,
                #[serde(skip_serializing_if = "Option::is_none")]
                snapshot: Option<SnapshotExport>,
            }
            let snapshot = index.map(|i| snapshot_export(&ctx.graph, &seq, i, None)).transpose()?;
            let snapshots = seq
                .snapshots()
                .iter()
                .map(|s| Brief {
                    index: s.index(),
                    boundary: s.boundary(),
                    vertices: (0..s.vertex_count() as VertexId).filter(|&v| s.contains(v)).count(),
                    edges: s.edge_count(),
                })
                .collect();
            ctx.emit(&io, stdout, Body { snapshots, snapshot })
        }
        Command::Hdv { io, params } => {
            let ctx = Context::load("hdv", &io, &params)?;
            let seq = ctx.engine.snapshots(&ctx.graph, ctx.params.intervals)?;
            let report = ctx.engine.dynamicity(&seq, &ctx.params.dynamicity())?;
            #[derive(Serialize)]
            struct Baseline {
                tau: f64,
                hdv: Vec<VertexId>,
            }
            #[derive(Serialize)]
            struct Body {
                snapshots: Vec<SnapshotSummary>,
                dynamicity: DynamicityExport,
                #[serde(skip_serializing_if = "Option::is_none")]
                baseline: Option<Baseline>,
            }
            let baseline = match params.tau {
                Some(tau) => Some(Baseline { tau, hdv: baseline_report(&seq, tau)?.0 }),
                None => None,
            };
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
            ctx.emit(&io, stdout, Body { snapshots, dynamicity: DynamicityExport::from(&report), baseline })
        }
        Command::Subgraph { io, params } => {
            let ctx = Context::load("subgraph", &io, &params)?;
            let seq = ctx.engine.snapshots(&ctx.graph, ctx.params.intervals)?;
            let report = ctx.engine.dynamicity(&seq, &ctx.params.dynamicity())?;
            let subgraphs = ctx.engine.subgraphs(&seq, &report);
            ctx.emit(&io, stdout, serde_json::json!({ "dynamicity": DynamicityExport::from(&report), "subgraphs": subgraphs }))
        }
        Command::Chronopath { io, params } => {
            let ctx = Context::load("chronopath", &io, &params)?;
            let run = ctx.paths()?;
            let queries: Vec<QueryExport> = run.iter().map(QueryExport::from).collect();
            ctx.emit(&io, stdout, serde_json::json!({ "queries": queries }))
        }
        Command::Patterns { io, params } => {
            let ctx = Context::load("patterns", &io, &params)?;
            let results = ctx.paths()?;
            let reps = representatives(&results);
            let paths: Vec<_> = reps.iter().map(|(_, _, p)| (*p).clone()).collect();
            let options = ctx.params.pattern_options();
            let found = extract_frequent_edges(&paths, ctx.params.pattern_threshold, options).map_err(Error::from)?;
            let path_refs: Vec<PathRef> = reps.iter().map(|&(query, target, _)| PathRef { query, target }).collect();
            #[derive(Serialize)]
            struct Body {
                path_refs: Vec<PathRef>,
                #[serde(flatten)]
                patterns: PatternsExport,
            }
            let body = Body { path_refs, patterns: PatternsExport::new(ctx.params.pattern_threshold, options, &found) };
            ctx.emit(&io, stdout, body)
        }
        Command::Eval { io, params, protocol } => eval(io, params, &protocol, stdout),
    }
}

fn eval(mut io: IoArgs, params: ParamArgs, protocol: &str, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let mut base = match protocol {
        "default" => EvalProtocol { dataset: String::new(), params: AnalysisParams::default() },
        path => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--protocol {path}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--protocol {path}: {e}")))?
        }
    };
    if io.input.is_none() && !base.dataset.is_empty() {
        io.input = Some(PathBuf::from(&base.dataset));
    }
    let ctx = Context::load_with("eval", &io, &params, Some(base.params.clone()))?;
    base.params = ctx.params.clone();
    if base.dataset.is_empty() {
        base.dataset = ctx.input.path.display().to_string();
    }
    let report = run_protocol(&ctx.graph, &base, ctx.engine.workers())?;
    let ext = io.output.as_deref().and_then(Path::extension).and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "json" => ctx.emit(&io, stdout, serde_json::json!({ "evaluation": report })),
        "csv" => write_out(&io, stdout, render_csv(report.summaries()).as_bytes()),
        _ => write_out(&io, stdout, render_comparison(report.summaries()).as_bytes()),
    }
}

/// Loaded graph plus the merged analysis parameters of one invocation.
struct Context {
    stage: &'static str,
    input: InputRef,
    graph: TemporalGraph,
    params: AnalysisParams,
    engine: Engine,
}

impl Context {
    fn load(stage: &'static str, io: &IoArgs, flags: &ParamArgs) -> CliResult<Self> {
        Self::load_with(stage, io, flags, None)
    }

    fn load_with(stage: &'static str, io: &IoArgs, flags: &ParamArgs, base: Option<AnalysisParams>) -> CliResult<Self> {
        // Flags are checked against the defaults before any file is read.
        let mut probe = base.clone().unwrap_or_default();
        flags.apply(&mut probe).map_err(CliError::Usage)?;
        if let Some(e) = probe.validate(None).into_iter().find(|e| !e.field.starts_with("queries")) {
            return Err(CliError::Usage(format!("--{}: {}", e.field.replace('_', "-"), e.message)));
        }
        if io.workers == Some(0) {
            return Err(CliError::Usage("--workers: must be at least 1".into()));
        }
        let input = io.input.as_ref().ok_or_else(|| CliError::Usage("--input is required".into()))?;

        let (input, mut params) = match read_stage_head(input)? {
            Some(head) => {
                if io.format.is_some() {
                    return Err(CliError::Usage("--format applies to dataset files, not stage documents".into()));
                }
                (head.input, head.params)
            }
            None => {
                let path = fs::canonicalize(input).map_err(|e| Error::io(input, e))?;
                // Descriptor files are pinned so later stages can run elsewhere.
                let format = match io.format.as_deref() {
                    Some(f) if crate::ingest::DatasetFormat::named(f).is_none() && !f.contains('=') => {
                        fs::canonicalize(f).map_or_else(|_| f.to_owned(), |p| p.display().to_string())
                    }
                    other => other.unwrap_or_default().to_owned(),
                };
                (InputRef { path, format, directed: !io.undirected }, base.unwrap_or_default())
            }
        };
        flags.apply(&mut params).map_err(CliError::Usage)?;
        let spec = (!input.format.is_empty()).then_some(input.format.as_str());
        let (graph, format) = load_graph(&input.path, spec, !input.directed)?;
        let input = InputRef { path: input.path, format, directed: graph.is_directed() };
        if let Some(e) = params.validate(Some(&graph)).first() {
            return Err(Error::Invalid(format!("{}: {}", e.field, e.message)).into());
        }
        let workers = io.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        Ok(Self { stage, input, graph, params, engine: Engine::new(workers)? })
    }

    /// Paths for the planned queries. A single strict query whose source is
    /// never highly dynamic is an error here, not an empty result.
    fn paths(&self) -> CliResult<Vec<chronopath_core::chronopath::QueryResult>> {
        let seq = self.engine.snapshots(&self.graph, self.params.intervals)?;
        let report = self.engine.dynamicity(&seq, &self.params.dynamicity())?;
        if let (PathMode::Strict, QuerySpec::FixedQueryList { queries }) = (self.params.mode, &self.params.queries) {
            for q in queries {
                let v = self.graph.vertex_by_label(&q.source).expect("labels validated");
                if !report.is_ever_hdv(v) {
                    return Err(CliError::Domain(format!(
                        "strict mode needs a highly dynamic source, but `{}` is not highly dynamic in any snapshot",
                        q.source
                    )));
                }
            }
        }
        let sources = report.union_hdv.clone();
        let run = run_method(&self.engine, &self.graph, &seq, ENGINE_METHOD, report, sources.len(), &sources, &self.params)?;
        Ok(run.results)
    }

    fn emit<T: Serialize>(&self, io: &IoArgs, stdout: &mut dyn std::io::Write, body: T) -> CliResult<()> {
        let doc = StageDoc {
            head: StageHead { stage: self.stage.into(), input: self.input.clone(), params: self.params.clone() },
            body,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
        text.push('\n');
        write_out(io, stdout, text.as_bytes())
    }
}

fn load_graph(path: &Path, spec: Option<&str>, undirected: bool) -> Result<(TemporalGraph, String)> {
    let content = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut format = crate::ingest::resolve_format(spec, Some(path), &content)?;
    if undirected {
        format = format.with_directed(false);
    }
    let graph = crate::ingest::parse_edge_list(&content, &format)?;
    Ok((graph, spec.map_or_else(|| format.name().to_owned(), str::to_owned)))
}

/// `Some` when the file is the JSON output of an earlier stage.
fn read_stage_head(path: &Path) -> CliResult<Option<StageHead>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().find(|b| !b.is_ascii_whitespace()) != Some(&b'{') {
        return Ok(None);
    }
    let Ok(value) = serde_json::from_slice::<Value>(&bytes) else {
        return Ok(None);
    };
    if value.get("stage").is_none() {
        return Ok(None);
    }
    let head: StageHead = serde_json::from_value(value)
        .map_err(|e| CliError::Domain(format!("{}: not a stage document: {e}", path.display())))?;
    Ok(Some(head))
}

fn write_out(io: &IoArgs, stdout: &mut dyn std::io::Write, bytes: &[u8]) -> CliResult<()> {
    match &io.output {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::io(path, e).into()),
        None => stdout.write_all(bytes).map_err(|e| Error::io("stdout", e).into()),
    }
}

/// Parses `args`, runs, and maps the outcome to an exit code. Diagnostics go
/// to `stderr` as one line.
pub fn main_with(args: impl IntoIterator<Item = String>, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message().replace('\n', " "));
            e.exit_code()
        }
    }
}
