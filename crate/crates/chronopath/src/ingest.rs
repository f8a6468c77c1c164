//! Edge-list parsing into [`TemporalGraph`], plus the canonical text form.
//!
//! Supported layouts:
//!
//! * whitespace-triple: `SRC DST TIMESTAMP` (SNAP email-Eu-core-temporal)
//! * csv-quad: `SOURCE,TARGET,RATING,TIME` (SNAP soc-sign-bitcoin-otc)
//! * generic: any delimited layout described by a key-value descriptor
//! * canonical: `#vertices=<n> directed=<bool>` header, `#label` lines,
//!   then sorted `src dst t_start t_end weight` rows
//!
//! Lines starting with `#` or `%` and blank lines are skipped. Fractional
//! timestamps are floored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use chronopath_core::graph::{TemporalEdge, TemporalGraph};
use chronopath_core::{Timestamp, VertexId};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatKind {
    WhitespaceTriple,
    CsvQuad,
    Generic,
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Src,
    Dst,
    /// Single timestamp: `t_start = t_end`.
    Time,
    TStart,
    TEnd,
    Weight,
    Ignore,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignedWeightPolicy {
    Reject,
    /// Subtract the smallest weight in the file.
    Shift,
    #[default]
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFormat {
    pub kind: FormatKind,
    pub columns: Vec<ColumnRole>,
    /// `None` splits on runs of whitespace.
    pub delimiter: Option<char>,
    pub has_header: bool,
    pub signed_weight_policy: SignedWeightPolicy,
    pub directed: bool,
}

impl DatasetFormat {
    pub fn whitespace_triple() -> Self {
        use ColumnRole::*;
        Self {
            kind: FormatKind::WhitespaceTriple,
            columns: vec![Src, Dst, Time],
            delimiter: None,
            has_header: false,
            signed_weight_policy: SignedWeightPolicy::Absolute,
            directed: true,
        }
    }

    pub fn csv_quad() -> Self {
        use ColumnRole::*;
        Self {
            kind: FormatKind::CsvQuad,
            columns: vec![Src, Dst, Weight, Time],
            delimiter: Some(','),
            ..Self::whitespace_triple()
        }
    }

    pub fn canonical() -> Self {
        use ColumnRole::*;
        Self {
            kind: FormatKind::Canonical,
            columns: vec![Src, Dst, TStart, TEnd, Weight],
            signed_weight_policy: SignedWeightPolicy::Reject,
            ..Self::whitespace_triple()
        }
    }

    /// `whitespace-triple`, `csv-quad` or `canonical`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "whitespace-triple" | "triple" => Some(Self::whitespace_triple()),
            "csv-quad" | "quad" => Some(Self::csv_quad()),
            "canonical" => Some(Self::canonical()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FormatKind::WhitespaceTriple => "whitespace-triple",
            FormatKind::CsvQuad => "csv-quad",
            FormatKind::Generic => "generic",
            FormatKind::Canonical => "canonical",
        }
    }

    pub fn with_directed(self, directed: bool) -> Self {
        Self { directed, ..self }
    }

    /// Parses a descriptor:
    ///
    /// ```text
    /// format = generic            # optional preset to start from
    /// delimiter = comma           # comma, tab, semicolon, whitespace or one char
    /// has_header = true
    /// columns = src, dst, weight, time
    /// signed_weight_policy = absolute
    /// directed = true
    /// ```
    pub fn from_descriptor(text: &str) -> Result<Self> {
        let mut format = Self { kind: FormatKind::Generic, ..Self::whitespace_triple() };
        let mut columns_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Descriptor(format!("line {}: {msg}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "format" | "kind" => {
                    let preset = match value {
                        "generic" => Self { kind: FormatKind::Generic, ..format.clone() },
                        other => Self::named(other).ok_or_else(|| bad(format!("unknown format `{other}`")))?,
                    };
                    if !columns_set {
                        format.columns = preset.columns;
                    }
                    format.kind = preset.kind;
                    format.delimiter = preset.delimiter;
                }
                "delimiter" => {
                    format.delimiter = match value {
                        "whitespace" | "space" => None,
                        "comma" => Some(','),
                        "tab" | "\\t" => Some('\t'),
                        "semicolon" => Some(';'),
                        "pipe" => Some('|'),
                        v if v.chars().count() == 1 => v.chars().next(),
                        v => return Err(bad(format!("unknown delimiter `{v}`"))),
                    }
                }
                "has_header" | "header" => format.has_header = parse_bool(value).ok_or_else(|| bad(format!("not a boolean: `{value}`")))?,
                "directed" => format.directed = parse_bool(value).ok_or_else(|| bad(format!("not a boolean: `{value}`")))?,
                "columns" => {
                    format.columns = value
                        .split(',')
                        .map(|c| parse_role(c.trim()).ok_or_else(|| bad(format!("unknown column role `{}`", c.trim()))))
                        .collect::<Result<_>>()?;
                    columns_set = true;
                }
                "signed_weight_policy" | "policy" => {
                    format.signed_weight_policy = match value {
                        "reject" => SignedWeightPolicy::Reject,
                        "shift" => SignedWeightPolicy::Shift,
                        "absolute" => SignedWeightPolicy::Absolute,
                        v => return Err(bad(format!("unknown policy `{v}`"))),
                    }
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        format.validate()?;
        Ok(format)
    }

    /// Column roles must cover src, dst and at least one timestamp.
    pub fn validate(&self) -> Result<()> {
        use ColumnRole::*;
        let count = |r: ColumnRole| self.columns.iter().filter(|&&c| c == r).count();
        for (role, name) in [(Src, "src"), (Dst, "dst")] {
            if count(role) != 1 {
                return Err(Error::Descriptor(format!("columns need exactly one `{name}`")));
            }
        }
        for (role, name) in [(Time, "time"), (TStart, "t_start"), (TEnd, "t_end"), (Weight, "weight")] {
            if count(role) > 1 {
                return Err(Error::Descriptor(format!("column `{name}` appears twice")));
            }
        }
        let times = count(Time) + count(TStart) + count(TEnd);
        if times == 0 {
            return Err(Error::Descriptor("columns need a timestamp (time, t_start or t_end)".into()));
        }
        if count(Time) == 1 && times > 1 {
            return Err(Error::Descriptor("`time` cannot be combined with t_start/t_end".into()));
        }
        Ok(())
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_role(s: &str) -> Option<ColumnRole> {
    use ColumnRole::*;
    Some(match s {
        "src" | "source" => Src,
        "dst" | "target" => Dst,
        "time" | "timestamp" => Time,
        "t_start" => TStart,
        "t_end" => TEnd,
        "weight" | "rating" => Weight,
        "ignore" | "_" => Ignore,
        _ => return None,
    })
}

/// Resolves a `--format` value: a preset name, the path of a descriptor file,
/// or `None` to guess from the content and file name.
pub fn resolve_format(spec: Option<&str>, path: Option<&Path>, content: &[u8]) -> Result<DatasetFormat> {
    match spec {
        Some(name) => match DatasetFormat::named(name) {
            Some(f) => Ok(f),
            None if name.contains('=') => DatasetFormat::from_descriptor(name),
            None => {
                let text = std::fs::read_to_string(name).map_err(|e| {
                    Error::Descriptor(format!("`{name}` is neither a format name nor a readable descriptor file ({e})"))
                })?;
                DatasetFormat::from_descriptor(&text)
            }
        },
        None => Ok(detect_format(path, content)),
    }
}

/// Canonical header wins, then a `.csv` extension, then whitespace-triple.
pub fn detect_format(path: Option<&Path>, content: &[u8]) -> DatasetFormat {
    if content.trim_ascii_start().starts_with(b"#vertices=") {
        DatasetFormat::canonical()
    } else if path.and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        DatasetFormat::csv_quad()
    } else {
        DatasetFormat::whitespace_triple()
    }
}

fn decode(content: &[u8]) -> Result<&str> {
    std::str::from_utf8(content).map_err(|e| {
        let line = content[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::Parse { line, message: "invalid UTF-8".into() }
    })
}

fn parse_timestamp(s: &str) -> Option<Timestamp> {
    if let Ok(t) = s.parse::<i64>() {
        return Some(t);
    }
    let f: f64 = s.parse().ok()?;
    let f = f.floor();
    (f.is_finite() && f >= i64::MIN as f64 && f < i64::MAX as f64).then_some(f as i64)
}

fn parse_weight(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|w| w.is_finite())
}

/// Data lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
}

struct Labels {
    ids: HashMap<String, VertexId>,
    names: Vec<String>,
}

impl Labels {
    fn id(&mut self, label: &str) -> VertexId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.names.len() as VertexId;
        self.names.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }
}

pub fn parse_edge_list(content: &[u8], format: &DatasetFormat) -> Result<TemporalGraph> {
    if format.kind == FormatKind::Canonical {
        return parse_canonical(content);
    }
    format.validate()?;
    let text = decode(content)?;
    let mut labels = Labels { ids: HashMap::new(), names: Vec::new() };
    let mut edges = Vec::new();
    let mut header_pending = format.has_header;

    for (line, row) in data_lines(text) {
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = match format.delimiter {
            None => row.split_whitespace().collect(),
            Some(d) => row.split(d).map(str::trim).collect(),
        };
        if fields.len() != format.columns.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", format.columns.len(), fields.len()),
            });
        }
        let fail = |message: String| Error::Parse { line, message };
        let (mut src, mut dst, mut ts, mut te, mut weight) = (None, None, None, None, 1.0);
        for (&role, &field) in format.columns.iter().zip(&fields) {
            let time = || parse_timestamp(field).ok_or_else(|| fail(format!("bad timestamp `{field}`")));
            match role {
                ColumnRole::Src | ColumnRole::Dst if field.is_empty() => return Err(fail("empty vertex label".into())),
                ColumnRole::Src => src = Some(field),
                ColumnRole::Dst => dst = Some(field),
                ColumnRole::Time => {
                    let t = time()?;
                    ts = Some(t);
                    te = Some(t);
                }
                ColumnRole::TStart => ts = Some(time()?),
                ColumnRole::TEnd => te = Some(time()?),
                ColumnRole::Weight => weight = parse_weight(field).ok_or_else(|| fail(format!("bad weight `{field}`")))?,
                ColumnRole::Ignore => {}
            }
        }
        let (t_start, t_end) = match (ts, te) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) | (None, Some(a)) => (a, a),
            (None, None) => unreachable!("validated formats carry a timestamp"),
        };
        if t_start > t_end {
            return Err(fail(format!("t_start {t_start} after t_end {t_end}")));
        }
        if weight < 0.0 && format.signed_weight_policy == SignedWeightPolicy::Reject {
            return Err(fail(format!("negative weight {weight} (policy reject)")));
        }
        let (s, d) = (labels.id(src.unwrap()), labels.id(dst.unwrap()));
        edges.push(TemporalEdge::new(s, d, t_start, t_end, weight));
    }
    if edges.is_empty() {
        return Err(Error::EmptyInput);
    }
    apply_policy(&mut edges, format.signed_weight_policy);
    Ok(TemporalGraph::from_parts(labels.names, edges, format.directed))
}

fn apply_policy(edges: &mut [TemporalEdge], policy: SignedWeightPolicy) {
    match policy {
        SignedWeightPolicy::Reject => {}
        SignedWeightPolicy::Absolute => {
            for e in edges.iter_mut().filter(|e| e.weight < 0.0) {
                e.raw_weight = Some(e.weight);
                e.weight = -e.weight;
            }
        }
        SignedWeightPolicy::Shift => {
            let min = edges.iter().map(|e| e.weight).fold(f64::INFINITY, f64::min);
            if min != 0.0 {
                for e in edges.iter_mut() {
                    e.raw_weight = Some(e.weight);
                    e.weight -= min;
                }
            }
        }
    }
}

pub fn parse_canonical(content: &[u8]) -> Result<TemporalGraph> {
    let text = decode(content)?;
    let mut rows = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (line, header) = rows.next().ok_or(Error::EmptyInput)?;
    let (n, directed) = parse_header(header).ok_or_else(|| Error::Parse {
        line,
        message: "expected header `#vertices=<n> directed=<bool>`".into(),
    })?;
    let mut labels: Vec<Option<String>> = vec![None; n];
    let mut edges = Vec::new();
    for (line, row) in rows {
        let fail = |message: String| Error::Parse { line, message };
        if let Some(rest) = row.strip_prefix("#label ") {
            let (id, label) = rest.split_once(' ').unwrap_or((rest, ""));
            let id: usize = id.parse().map_err(|_| fail(format!("bad label id `{id}`")))?;
            let slot = labels.get_mut(id).ok_or_else(|| fail(format!("label id {id} >= vertex count {n}")))?;
            *slot = Some(label.to_owned());
            continue;
        }
        if row.starts_with('#') || row.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(fail(format!("expected 5 fields, found {}", fields.len())));
        }
        let vertex = |s: &str| -> Result<VertexId> {
            match s.parse::<VertexId>() {
                Ok(v) if (v as usize) < n => Ok(v),
                _ => Err(fail(format!("bad vertex id `{s}`"))),
            }
        };
        let time = |s: &str| s.parse::<Timestamp>().map_err(|_| fail(format!("bad timestamp `{s}`")));
        let (src, dst, ts, te) = (vertex(fields[0])?, vertex(fields[1])?, time(fields[2])?, time(fields[3])?);
        let weight = parse_weight(fields[4]).ok_or_else(|| fail(format!("bad weight `{}`", fields[4])))?;
        if ts > te {
            return Err(fail(format!("t_start {ts} after t_end {te}")));
        }
        if weight < 0.0 {
            return Err(fail(format!("negative weight {weight}")));
        }
        edges.push(TemporalEdge::new(src, dst, ts, te, weight));
    }
    if edges.is_empty() {
        return Err(Error::EmptyInput);
    }
    let labels = labels.into_iter().enumerate().map(|(i, l)| l.unwrap_or_else(|| i.to_string())).collect();
    Ok(TemporalGraph::from_parts(labels, edges, directed))
}

fn parse_header(line: &str) -> Option<(usize, bool)> {
    let mut parts = line.strip_prefix('#')?.split_whitespace();
    let n = parts.next()?.strip_prefix("vertices=")?.parse().ok()?;
    let directed = parse_bool(parts.next()?.strip_prefix("directed=")?)?;
    Some((n, directed))
}

/// Canonical text. Signed-weight provenance (`raw_weight`) is not kept.
pub fn to_canonical(graph: &TemporalGraph) -> String {
    let mut out = String::with_capacity(32 * graph.edge_count());
    let _ = writeln!(out, "#vertices={} directed={}", graph.vertex_count(), graph.is_directed());
    for (i, label) in graph.labels().iter().enumerate() {
        let _ = writeln!(out, "#label {i} {label}");
    }
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {} {} {}", e.src, e.dst, e.t_start, e.t_end, e.weight);
    }
    out
}

pub fn read_graph(path: &Path, format: Option<&str>) -> Result<(TemporalGraph, DatasetFormat)> {
    let content = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = resolve_format(format, Some(path), &content)?;
    Ok((parse_edge_list(&content, &format)?, format))
}
