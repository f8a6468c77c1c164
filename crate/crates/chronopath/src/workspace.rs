//! Filesystem-backed store for datasets and analysis jobs.
//!
//! ```text
//! <root>/datasets/<id>/graph.txt    canonical graph
//! <root>/datasets/<id>/meta.json
//! <root>/jobs/<id>/job.json         record (status, config, timestamps)
//! <root>/jobs/<id>/log.jsonl        one log line per row
//! <root>/jobs/<id>/result.json      bundle, written once on success
//! ```

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use chronopath_core::graph::TemporalGraph;
use chronopath_core::Timestamp;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{parse_canonical, parse_edge_list, to_canonical, DatasetFormat};
use crate::pipeline::{run_pipeline, PipelineConfig};

pub const RESTART_MARKER: &str = "interrupted by service restart";

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub dataset_id: String,
    pub name: String,
    pub format: String,
    pub vertices: usize,
    pub edges: usize,
    pub t_min: Timestamp,
    pub t_max: Timestamp,
    pub directed: bool,
    pub created_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Succeeded | JobStatus::Failed)
    }

    fn as_str(self) -> &'static str {
        match self {
            JobStatus::Queued => "queued",
            JobStatus::Running => "running",
            JobStatus::Succeeded => "succeeded",
            JobStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_id: String,
    pub dataset_id: String,
    pub config: PipelineConfig,
    pub status: JobStatus,
    pub created_ms: u64,
    pub started_ms: Option<u64>,
    pub finished_ms: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogLine {
    pub index: usize,
    pub time_ms: u64,
    pub message: String,
}

pub struct Job {
    dir: PathBuf,
    record: Mutex<JobRecord>,
    log: Mutex<Vec<LogLine>>,
}

impl Job {
    pub fn record(&self) -> JobRecord {
        self.record.lock().unwrap().clone()
    }

    pub fn status(&self) -> JobStatus {
        self.record.lock().unwrap().status
    }

    /// Lines from `from` on, plus the index the next poll should use.
    pub fn log_from(&self, from: usize) -> (Vec<LogLine>, usize) {
        let log = self.log.lock().unwrap();
        let start = from.min(log.len());
        (log[start..].to_vec(), log.len())
    }

    pub fn log(&self, message: impl Into<String>) {
        let mut log = self.log.lock().unwrap();
        let line = LogLine { index: log.len(), time_ms: now_ms(), message: message.into() };
        // A failed append only loses persistence of this line; the
        // in-memory log stays complete.
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(self.dir.join("log.jsonl")) {
            let _ = writeln!(f, "{}", serde_json::to_string(&line).unwrap_or_default());
        }
        log.push(line);
    }

    /// Logs and persists a transition. Transitions out of a terminal state
    /// are ignored.
    fn transition(&self, to: JobStatus, error: Option<String>) -> Result<()> {
        let mut record = self.record.lock().unwrap();
        if record.status.is_terminal() {
            return Ok(());
        }
        record.status = to;
        match to {
            JobStatus::Running => record.started_ms = Some(now_ms()),
            JobStatus::Succeeded | JobStatus::Failed => record.finished_ms = Some(now_ms()),
            JobStatus::Queued => {}
        }
        record.error = error.clone();
        write_json(&self.dir.join("job.json"), &*record)?;
        drop(record);
        match error {
            Some(e) => self.log(format!("status {}: {e}", to.as_str())),
            None => self.log(format!("status {}", to.as_str())),
        }
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(value)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub struct Workspace {
    root: PathBuf,
    datasets: RwLock<BTreeMap<String, DatasetMeta>>,
    jobs: RwLock<BTreeMap<String, Arc<Job>>>,
    graphs: Mutex<BTreeMap<String, Arc<TemporalGraph>>>,
    next_id: AtomicU64,
}

fn id_number(id: &str) -> u64 {
    id.rsplit('-').next().and_then(|n| n.parse().ok()).unwrap_or(0)
}

impl Workspace {
    /// Opens (or creates) a workspace. Jobs found `running` are marked
    /// failed with [`RESTART_MARKER`]; the ids of `queued` jobs are returned
    /// so the caller can resubmit them.
    pub fn open(root: impl Into<PathBuf>) -> Result<(Self, Vec<String>)> {
        let root = root.into();
        for sub in ["datasets", "jobs"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        let mut max_id = 0;
        let mut datasets = BTreeMap::new();
        for dir in subdirs(&root.join("datasets"))? {
            let meta: DatasetMeta = read_json(&dir.join("meta.json"))?;
            max_id = max_id.max(id_number(&meta.dataset_id));
            datasets.insert(meta.dataset_id.clone(), meta);
        }
        let mut jobs = BTreeMap::new();
        let mut queued = Vec::new();
        for dir in subdirs(&root.join("jobs"))? {
            let record: JobRecord = read_json(&dir.join("job.json"))?;
            max_id = max_id.max(id_number(&record.job_id));
            let log = fs::read_to_string(dir.join("log.jsonl"))
                .unwrap_or_default()
                .lines()
                .filter_map(|l| serde_json::from_str(l).ok())
                .collect();
            let id = record.job_id.clone();
            let status = record.status;
            let job = Arc::new(Job { dir, record: Mutex::new(record), log: Mutex::new(log) });
            match status {
                JobStatus::Running => job.transition(JobStatus::Failed, Some(RESTART_MARKER.into()))?,
                JobStatus::Queued => queued.push(id.clone()),
                _ => {}
            }
            jobs.insert(id, job);
        }
        let ws = Self {
            root,
            datasets: RwLock::new(datasets),
            jobs: RwLock::new(jobs),
            graphs: Mutex::new(BTreeMap::new()),
            next_id: AtomicU64::new(max_id + 1),
        };
        Ok((ws, queued))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}-{:06}", self.next_id.fetch_add(1, Ordering::SeqCst))
    }

    pub fn add_dataset(&self, name: &str, content: &[u8], format: &DatasetFormat) -> Result<DatasetMeta> {
        let graph = parse_edge_list(content, format)?;
        let id = self.fresh_id("ds");
        let dir = self.root.join("datasets").join(&id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join("graph.txt");
        fs::write(&path, to_canonical(&graph)).map_err(|e| Error::io(&path, e))?;
        let meta = DatasetMeta {
            dataset_id: id.clone(),
            name: name.to_owned(),
            format: format.name().to_owned(),
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            t_min: graph.t_min(),
            t_max: graph.t_max(),
            directed: graph.is_directed(),
            created_ms: now_ms(),
        };
        write_json(&dir.join("meta.json"), &meta)?;
        self.graphs.lock().unwrap().insert(id.clone(), Arc::new(graph));
        self.datasets.write().unwrap().insert(id, meta.clone());
        Ok(meta)
    }

    pub fn datasets(&self) -> Vec<DatasetMeta> {
        self.datasets.read().unwrap().values().cloned().collect()
    }

    pub fn dataset(&self, id: &str) -> Option<DatasetMeta> {
        self.datasets.read().unwrap().get(id).cloned()
    }

    pub fn graph(&self, id: &str) -> Result<Option<Arc<TemporalGraph>>> {
        if self.dataset(id).is_none() {
            return Ok(None);
        }
        if let Some(g) = self.graphs.lock().unwrap().get(id) {
            return Ok(Some(g.clone()));
        }
        let path = self.root.join("datasets").join(id).join("graph.txt");
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let graph = Arc::new(parse_canonical(&bytes)?);
        self.graphs.lock().unwrap().insert(id.to_owned(), graph.clone());
        Ok(Some(graph))
    }

    pub fn create_job(&self, dataset_id: &str, config: PipelineConfig) -> Result<Arc<Job>> {
        let id = self.fresh_id("job");
        let dir = self.root.join("jobs").join(&id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let record = JobRecord {
            job_id: id.clone(),
            dataset_id: dataset_id.to_owned(),
            config,
            status: JobStatus::Queued,
            created_ms: now_ms(),
            started_ms: None,
            finished_ms: None,
            error: None,
        };
        write_json(&dir.join("job.json"), &record)?;
        let job = Arc::new(Job { dir, record: Mutex::new(record), log: Mutex::new(Vec::new()) });
        job.log(format!("status queued: dataset {dataset_id}"));
        self.jobs.write().unwrap().insert(id, job.clone());
        Ok(job)
    }

    pub fn job(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs.read().unwrap().get(id).cloned()
    }

    pub fn jobs(&self) -> Vec<JobRecord> {
        self.jobs.read().unwrap().values().map(|j| j.record()).collect()
    }

    /// Bundle bytes exactly as written when the job finished.
    pub fn result(&self, id: &str) -> Result<Vec<u8>> {
        let path = self.root.join("jobs").join(id).join("result.json");
        fs::read(&path).map_err(|e| Error::io(&path, e))
    }

    /// Runs a queued job to completion on the calling thread.
    pub fn run_job(&self, id: &str) -> Result<()> {
        let job = self.job(id).ok_or_else(|| Error::Invalid(format!("unknown job {id}")))?;
        if job.status() != JobStatus::Queued {
            return Ok(());
        }
        job.transition(JobStatus::Running, None)?;
        let record = job.record();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| -> Result<Vec<u8>> {
            let graph = self
                .graph(&record.dataset_id)?
                .ok_or_else(|| Error::Invalid(format!("dataset {} is gone", record.dataset_id)))?;
            let bundle = run_pipeline(&graph, &record.config, &mut |line: String| job.log(line))?;
            Ok(serde_json::to_vec(&bundle)?)
        }));
        match outcome {
            Ok(Ok(bytes)) => {
                let path = job.dir.join("result.json");
                fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
                job.transition(JobStatus::Succeeded, None)
            }
            Ok(Err(e)) => job.transition(JobStatus::Failed, Some(e.to_string())),
            Err(_) => job.transition(JobStatus::Failed, Some("pipeline panicked".into())),
        }
    }
}

fn subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    out.sort();
    Ok(out)
}
