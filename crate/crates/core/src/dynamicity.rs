//! Per-vertex change scores between consecutive snapshots and the resulting
//! highly dynamic vertex (HDV) sets, plus a degree-centrality baseline.
//!
//! The shipped metric combines two relative changes, each in `[0, 1]`:
//!
//! ```text
//! score = w1 * |HM_curr - HM_prev| / max(HM_curr, HM_prev, eps)
//!       + w2 * |deg_curr - deg_prev| / max(deg_curr, deg_prev, 1)
//! ```
//!
//! where `HM` is the harmonic mean of incident edge weights and `deg` the
//! raw incident edge count. Other metrics plug in through [`ChangeMetric`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::snapshot::{Snapshot, SnapshotSequence};
use crate::{Error, Result, VertexId};

pub const DEFAULT_EPSILON: f64 = 1e-9;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicityConfig {
    pub w1: f64,
    pub w2: f64,
    pub theta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for DynamicityConfig {
    /// `w1 = 0.8`, `w2 = 0.2`, `theta = 0.1`.
    fn default() -> Self {
        Self { w1: 0.8, w2: 0.2, theta: 0.1, epsilon: DEFAULT_EPSILON }
    }
}

impl DynamicityConfig {
    pub fn new(w1: f64, w2: f64, theta: f64) -> Result<Self> {
        let config = Self { w1, w2, theta, epsilon: DEFAULT_EPSILON };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.w1) || !unit(self.w2) {
            return Err(Error::InvalidConfig(format!(
                "w1 and w2 must lie in [0, 1] (got w1={}, w2={})",
                self.w1, self.w2
            )));
        }
        if (self.w1 + self.w2 - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "w1 + w2 must equal 1 (got {})",
                self.w1 + self.w2
            )));
        }
        if !unit(self.theta) {
            return Err(Error::InvalidConfig(format!("theta must lie in [0, 1] (got {})", self.theta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive (got {})", self.epsilon)));
        }
        Ok(())
    }
}

/// `d / sum(1 / max(w, eps))` over incident edges, `0` for isolated vertices.
///
/// Zero weights are guarded by `epsilon`; positive weights enter as `1 / w`.
pub fn harmonic_mean_weight(snapshot: &Snapshot, v: VertexId, epsilon: f64) -> f64 {
    let s = snapshot.stats(v);
    if s.incident == 0 {
        return 0.0;
    }
    let denom = s.recip_sum + f64::from(s.zero_weight) / epsilon;
    f64::from(s.incident) / denom
}

fn relative_change(prev: f64, curr: f64, floor: f64) -> f64 {
    let scale = prev.max(curr).max(floor);
    ((curr - prev).abs() / scale).min(1.0)
}

/// Scores one vertex between two snapshots. Implementations must return a
/// value in `[0, 1]`.
pub trait ChangeMetric: Sync {
    fn score(&self, v: VertexId, prev: &Snapshot, curr: &Snapshot) -> f64;
}

/// Weighted harmonic-mean and degree change.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicDegreeMetric {
    pub config: DynamicityConfig,
}

impl ChangeMetric for HarmonicDegreeMetric {
    fn score(&self, v: VertexId, prev: &Snapshot, curr: &Snapshot) -> f64 {
        let c = &self.config;
        let hm_prev = harmonic_mean_weight(prev, v, c.epsilon);
        let hm_curr = harmonic_mean_weight(curr, v, c.epsilon);
        let delta_hm = relative_change(hm_prev, hm_curr, c.epsilon);
        let delta_deg = relative_change(f64::from(prev.degree(v)), f64::from(curr.degree(v)), 1.0);
        (c.w1 * delta_hm + c.w2 * delta_deg).clamp(0.0, 1.0)
    }
}

pub fn dynamicity_score(v: VertexId, prev: &Snapshot, curr: &Snapshot, config: &DynamicityConfig) -> Result<f64> {
    if prev.index() + 1 != curr.index() {
        return Err(Error::NonConsecutiveSnapshots { prev: prev.index(), curr: curr.index() });
    }
    if v as usize >= curr.vertex_count() {
        return Err(Error::VertexOutOfRange(v));
    }
    Ok(HarmonicDegreeMetric { config: *config }.score(v, prev, curr))
}

/// Scores of every vertex with an incident edge in `prev` or `curr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotScores {
    pub index: usize,
    /// Sorted by vertex id.
    pub scores: Vec<(VertexId, f64)>,
}

pub fn score_snapshot_pair(prev: &Snapshot, curr: &Snapshot, metric: &dyn ChangeMetric) -> SnapshotScores {
    let scores = (0..curr.vertex_count() as VertexId)
        .filter(|&v| prev.contains(v) || curr.contains(v))
        .map(|v| (v, metric.score(v, prev, curr)))
        .collect();
    SnapshotScores { index: curr.index(), scores }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHdv {
    pub index: usize,
    /// Sorted vertex ids.
    pub hdv: Vec<VertexId>,
    pub scores: Vec<(VertexId, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicityReport {
    /// One entry per snapshot index `i >= 1`, ascending. Snapshot 0 has no
    /// predecessor and therefore no HDVs.
    pub per_snapshot: Vec<SnapshotHdv>,
    pub union_hdv: Vec<VertexId>,
}

impl DynamicityReport {
    pub fn from_scores(mut scores: Vec<SnapshotScores>, theta: f64) -> Self {
        scores.sort_by_key(|s| s.index);
        let per_snapshot = scores
            .into_iter()
            .map(|s| SnapshotHdv {
                index: s.index,
                hdv: s.scores.iter().filter(|(_, x)| *x >= theta).map(|(v, _)| *v).collect(),
                scores: s.scores,
            })
            .collect();
        Self::finish(per_snapshot)
    }

    /// Report from explicit per-snapshot sets, without scores. Used for
    /// baselines and hand-built instances.
    pub fn from_sets(sets: Vec<(usize, Vec<VertexId>)>) -> Self {
        let mut per_snapshot: Vec<SnapshotHdv> = sets
            .into_iter()
            .map(|(index, mut hdv)| {
                hdv.sort_unstable();
                hdv.dedup();
                SnapshotHdv { index, hdv, scores: Vec::new() }
            })
            .collect();
        per_snapshot.sort_by_key(|s| s.index);
        Self::finish(per_snapshot)
    }

    /// The same static set marked dynamic in each of `snapshot_count` snapshots.
    pub fn uniform(set: &[VertexId], snapshot_count: usize) -> Self {
        Self::from_sets((0..snapshot_count).map(|i| (i, set.to_vec())).collect())
    }

    fn finish(per_snapshot: Vec<SnapshotHdv>) -> Self {
        let mut union_hdv: Vec<VertexId> = per_snapshot.iter().flat_map(|s| s.hdv.iter().copied()).collect();
        union_hdv.sort_unstable();
        union_hdv.dedup();
        Self { per_snapshot, union_hdv }
    }

    pub fn hdv_set(&self, index: usize) -> &[VertexId] {
        self.per_snapshot
            .iter()
            .find(|s| s.index == index)
            .map_or(&[], |s| s.hdv.as_slice())
    }

    pub fn is_hdv(&self, index: usize, v: VertexId) -> bool {
        self.hdv_set(index).binary_search(&v).is_ok()
    }

    pub fn is_ever_hdv(&self, v: VertexId) -> bool {
        self.union_hdv.binary_search(&v).is_ok()
    }

    /// Dense membership masks, `masks[i][v]`.
    pub fn masks(&self, snapshot_count: usize, vertex_count: usize) -> Vec<Vec<bool>> {
        (0..snapshot_count)
            .map(|i| {
                let mut mask = vec![false; vertex_count];
                for &v in self.hdv_set(i) {
                    if let Some(m) = mask.get_mut(v as usize) {
                        *m = true;
                    }
                }
                mask
            })
            .collect()
    }
}

pub fn detect_hdv(seq: &SnapshotSequence, config: &DynamicityConfig) -> Result<DynamicityReport> {
    detect_hdv_with(seq, &HarmonicDegreeMetric { config: *config }, config.theta)
}

pub fn detect_hdv_with(seq: &SnapshotSequence, metric: &dyn ChangeMetric, theta: f64) -> Result<DynamicityReport> {
    if seq.len() < 2 {
        return Err(Error::TooFewSnapshots(seq.len()));
    }
    let scores = seq
        .snapshots()
        .windows(2)
        .map(|pair| score_snapshot_pair(&pair[0], &pair[1], metric))
        .collect();
    Ok(DynamicityReport::from_scores(scores, theta))
}

/// `C_D(v) = deg(v) / (n - 1)` with distinct-neighbor degree in the
/// undirected simple view.
pub fn degree_centrality(snapshot: &Snapshot) -> Result<Vec<f64>> {
    let n = snapshot.vertex_count();
    if n < 2 {
        return Err(Error::DegenerateCentrality);
    }
    let (offsets, _) = snapshot.simple_neighbors();
    let denom = (n - 1) as f64;
    Ok(offsets.windows(2).map(|w| (w[1] - w[0]) as f64 / denom).collect())
}

/// Vertices of the final snapshot with degree centrality strictly above `tau`.
pub fn baseline_hdv_degree(seq: &SnapshotSequence, tau: f64) -> Result<Vec<VertexId>> {
    let last = seq.last().ok_or(Error::TooFewSnapshots(0))?;
    baseline_threshold(last, tau)
}

pub fn baseline_threshold(snapshot: &Snapshot, tau: f64) -> Result<Vec<VertexId>> {
    Ok(degree_centrality(snapshot)?
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > tau)
        .map(|(v, _)| v as VertexId)
        .collect())
}

/// The `k` most central vertices of the final snapshot, ties by smaller id.
/// Vertices with zero centrality are never selected.
pub fn baseline_top_k(seq: &SnapshotSequence, k: usize) -> Result<Vec<VertexId>> {
    let last = seq.last().ok_or(Error::TooFewSnapshots(0))?;
    let centrality = degree_centrality(last)?;
    let mut order: Vec<VertexId> = (0..centrality.len() as VertexId)
        .filter(|&v| centrality[v as usize] > 0.0)
        .collect();
    order.sort_by(|a, b| centrality[*b as usize].total_cmp(&centrality[*a as usize]).then(a.cmp(b)));
    order.truncate(k);
    order.sort_unstable();
    Ok(order)
}
