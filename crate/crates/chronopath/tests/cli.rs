use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TOY: &str = "0 1 1\n1 2 2\n2 3 3\n0 2 4\n3 4 5\n4 0 6\n1 3 7\n2 4 8\n0 3 9\n1 4 10\n0 4 11\n2 0 12\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronopath")).current_dir(dir).args(args).output().unwrap()
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.txt"), TOY).unwrap();
    dir
}

#[test]
fn every_stage_accepts_the_previous_stage_output() {
    let dir = fixture();
    let d = dir.path();
    let chain = [
        ("ingest", vec!["ingest", "--input", "g.txt", "--output", "1.json"]),
        ("snapshots", vec!["snapshots", "--input", "1.json", "--intervals", "4", "--output", "2.json"]),
        ("hdv", vec!["hdv", "--input", "2.json", "--output", "3.json"]),
        ("subgraph", vec!["subgraph", "--input", "3.json", "--output", "4.json"]),
        ("chronopath", vec!["chronopath", "--input", "4.json", "--output", "5.json"]),
        ("patterns", vec!["patterns", "--input", "5.json", "--threshold", "1", "--output", "6.json"]),
    ];
    for (i, (stage, args)) in chain.iter().enumerate() {
        let out = run(d, args);
        assert_eq!(out.status.code(), Some(0), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
        let doc: Value = serde_json::from_slice(&std::fs::read(d.join(format!("{}.json", i + 1))).unwrap()).unwrap();
        assert_eq!(doc["stage"], *stage);
        if i > 0 {
            // Parameters set upstream are inherited downstream.
            assert_eq!(doc["params"]["intervals"], 4, "{stage}");
        }
    }
    let hdv: Value = serde_json::from_slice(&std::fs::read(d.join("3.json")).unwrap()).unwrap();
    assert_eq!(hdv["snapshots"].as_array().unwrap().len(), 5);
    assert!(hdv["dynamicity"]["union_hdv"].is_array());
    let sub: Value = serde_json::from_slice(&std::fs::read(d.join("4.json")).unwrap()).unwrap();
    assert_eq!(sub["subgraphs"].as_array().unwrap().len(), 5);
    let patterns: Value = serde_json::from_slice(&std::fs::read(d.join("6.json")).unwrap()).unwrap();
    assert_eq!(patterns["threshold"], 1);
    assert!(patterns["patterns"].is_array() && patterns["path_refs"].is_array());
}

#[test]
fn ingest_writes_canonical_form() {
    let dir = fixture();
    let doc = ok_json(dir.path(), &["ingest", "--input", "g.txt", "--canonical", "g.tsv"]);
    assert_eq!(doc["dataset"]["vertices"], 5);
    assert_eq!(doc["dataset"]["edges"], 12);
    let again = ok_json(dir.path(), &["ingest", "--input", "g.tsv"]);
    assert_eq!(again["dataset"], doc["dataset"]);
    assert_eq!(again["input"]["format"], "canonical");
}

#[test]
fn snapshot_index_emits_full_view() {
    let dir = fixture();
    let doc = ok_json(dir.path(), &["snapshots", "--input", "g.txt", "--intervals", "3", "--index", "3"]);
    assert_eq!(doc["snapshot"]["index"], 3);
    assert_eq!(doc["snapshot"]["vertices"].as_array().unwrap().len(), 5);
    let out = run(dir.path(), &["snapshots", "--input", "g.txt", "--intervals", "3", "--index", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn hdv_reports_baseline_when_tau_given() {
    let dir = fixture();
    let args = ["hdv", "--input", "g.txt", "--w1", "0.8", "--w2", "0.2", "--theta", "0.1", "--intervals", "10"];
    let doc = ok_json(dir.path(), &args);
    assert!(doc.get("baseline").is_none());
    let with_tau = ok_json(dir.path(), &[&args[..], &["--tau", "0.1"]].concat());
    assert_eq!(with_tau["baseline"]["tau"], 0.1);
    assert_eq!(with_tau["dynamicity"], doc["dynamicity"]);
}

#[test]
fn strict_source_that_is_never_dynamic_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // `z` only appears in the first snapshot window and never changes after.
    std::fs::write(dir.path().join("g.txt"), "z a 0\na b 1\nb c 5\nc a 9\nb a 10\n").unwrap();
    let hdv = ok_json(dir.path(), &["hdv", "--input", "g.txt", "--intervals", "2"]);
    let z = 0;
    assert!(!hdv["dynamicity"]["union_hdv"].as_array().unwrap().contains(&Value::from(z)), "{hdv}");
    let out = run(dir.path(), &["chronopath", "--input", "g.txt", "--intervals", "2", "--mode", "strict", "--source", "z", "--targets", "c"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("highly dynamic source") && err.contains("`z`"), "{err}");
    // Relaxed mode has no such precondition.
    let out = run(dir.path(), &["chronopath", "--input", "g.txt", "--intervals", "2", "--mode", "relaxed", "--source", "z", "--targets", "c"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_2_before_reading_input() {
    let dir = fixture();
    for args in [
        vec!["hdv", "--input", "missing.txt", "--w1", "0.9"],
        vec!["hdv", "--input", "missing.txt", "--theta", "2"],
        vec!["chronopath", "--input", "missing.txt", "--source", "0"],
        vec!["chronopath", "--input", "missing.txt", "--mode", "sideways"],
        vec!["hdv", "--input", "missing.txt", "--workers", "0"],
        vec!["hdv"],
        vec!["frobnicate"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn domain_errors_exit_1_with_one_line() {
    let dir = fixture();
    std::fs::write(dir.path().join("bad.txt"), "0 1 1\n1 2 noon\n").unwrap();
    for args in [
        vec!["ingest", "--input", "missing.txt"],
        vec!["ingest", "--input", "bad.txt"],
        vec!["chronopath", "--input", "g.txt", "--source", "nobody", "--targets", "1"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "), "{err}");
    }
    let err = String::from_utf8(run(dir.path(), &["ingest", "--input", "bad.txt"]).stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn eval_output_is_byte_identical_across_runs_and_workers() {
    let dir = fixture();
    let a = run(dir.path(), &["eval", "--input", "g.txt", "--protocol", "default", "--seed", "7", "--workers", "1"]);
    let b = run(dir.path(), &["eval", "--input", "g.txt", "--protocol", "default", "--seed", "7", "--workers", "3"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let table = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("Method"));
    assert!(lines[1].starts_with("dynamicity") && lines[2].starts_with("degree-centrality"));
}

#[test]
fn eval_output_format_follows_extension() {
    let dir = fixture();
    let d = dir.path();
    assert_eq!(run(d, &["eval", "--input", "g.txt", "--output", "e.csv"]).status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("e.csv")).unwrap();
    assert!(csv.starts_with("method,hdv_count,coverage_rate,avg_path_length\n"));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(run(d, &["eval", "--input", "g.txt", "--output", "e.json"]).status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&std::fs::read(d.join("e.json")).unwrap()).unwrap();
    assert_eq!(doc["stage"], "eval");
    assert_eq!(doc["evaluation"]["engine"]["method"], "dynamicity");
    assert_eq!(doc["evaluation"]["params"]["queries"]["seed"], 7);
}

#[test]
fn eval_reads_protocol_file() {
    let dir = fixture();
    let protocol = serde_json::json!({
        "dataset": "g.txt",
        "intervals": 4,
        "queries": { "rule": "each_hdv_to_sampled_targets", "sample_size": 3, "seed": 11 }
    });
    std::fs::write(dir.path().join("p.json"), protocol.to_string()).unwrap();
    assert_eq!(run(dir.path(), &["eval", "--protocol", "p.json", "--output", "e.json"]).status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(doc["params"]["intervals"], 4);
    assert_eq!(doc["params"]["queries"]["sample_size"], 3);
    assert_eq!(run(dir.path(), &["eval", "--protocol", "nope.json"]).status.code(), Some(2));
}

#[test]
fn descriptor_file_and_undirected_flag_carry_downstream() {
    let dir = fixture();
    let d = dir.path();
    std::fs::write(d.join("g.csv"), "from;to;when;w\na;b;1;2\nb;c;2;3\nc;a;3;1\n").unwrap();
    std::fs::write(d.join("fmt.desc"), "delimiter = semicolon\nhas_header = true\ncolumns = src, dst, time, weight\n").unwrap();
    let out = run(d, &["ingest", "--input", "g.csv", "--format", "fmt.desc", "--undirected", "--output", "i.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&std::fs::read(d.join("i.json")).unwrap()).unwrap();
    assert_eq!(doc["dataset"]["edges"], 3);
    assert_eq!(doc["input"]["directed"], false);
    // The downstream stage runs from another directory.
    let elsewhere = tempfile::tempdir().unwrap();
    let input = d.join("i.json");
    let next = ok_json(elsewhere.path(), &["hdv", "--input", input.to_str().unwrap(), "--intervals", "2"]);
    assert_eq!(next["input"], doc["input"]);
    let out = run(d, &["hdv", "--input", "i.json", "--format", "csv-quad"]);
    assert_eq!(out.status.code(), Some(2));
}
