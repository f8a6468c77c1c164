use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use chronopath::service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const TOY: &str = "0 1 1\n1 2 2\n2 3 3\n0 2 4\n3 4 5\n4 0 6\n1 3 7\n2 4 8\n0 3 9\n1 4 10\n0 4 11\n2 0 12\n";

struct Harness {
    _dir: tempfile::TempDir,
    root: std::path::PathBuf,
    app: Router,
    config: ServiceConfig,
}

impl Harness {
    fn new() -> Self {
        Self::with_config(|_| {})
    }

    fn with_config(tweak: impl FnOnce(&mut ServiceConfig)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ws");
        let mut config = ServiceConfig {
            workspace: root.clone(),
            static_dir: dir.path().join("no-static"),
            ..Default::default()
        };
        tweak(&mut config);
        let app = router(AppState::start(root.clone()).unwrap(), &config);
        Self { _dir: dir, root, app, config }
    }

    fn restart(&mut self) {
        self.app = router(AppState::start(self.root.clone()).unwrap(), &self.config);
    }

    async fn send(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        let (s, b) = self.send(Request::get(uri).body(Body::empty()).unwrap()).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    async fn post_json(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        let req = Request::post(uri)
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        let (s, b) = self.send(req).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    async fn upload(&self, query: &str, content: &str) -> (StatusCode, Value) {
        let req = Request::post(format!("/api/datasets?{query}")).body(Body::from(content.to_owned())).unwrap();
        let (s, b) = self.send(req).await;
        (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
    }

    async fn dataset(&self, content: &str) -> String {
        let (s, v) = self.upload("format=whitespace-triple&name=toy", content).await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        v["dataset_id"].as_str().unwrap().to_owned()
    }

    async fn job(&self, body: Value) -> String {
        let (s, v) = self.post_json("/api/jobs", body).await;
        assert_eq!(s, StatusCode::ACCEPTED, "{v}");
        v["job_id"].as_str().unwrap().to_owned()
    }

    async fn wait(&self, job: &str) -> Value {
        let start = Instant::now();
        loop {
            let (s, v) = self.get(&format!("/api/jobs/{job}")).await;
            assert_eq!(s, StatusCode::OK);
            if v["status"] == "succeeded" || v["status"] == "failed" {
                return v;
            }
            assert!(start.elapsed() < Duration::from_secs(60), "job {job} stuck: {v}");
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }
}

#[tokio::test]
async fn two_line_upload_is_created() {
    let h = Harness::new();
    let (s, v) = h.upload("format=whitespace-triple", "a b 1\nb c 2\n").await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!((v["vertices"].as_u64(), v["edges"].as_u64()), (Some(3), Some(2)));
    let (s, list) = h.get("/api/datasets").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(list.as_array().unwrap().len(), 1);
    let (s, one) = h.get(&format!("/api/datasets/{}", v["dataset_id"].as_str().unwrap())).await;
    assert_eq!((s, one["edges"].as_u64()), (StatusCode::OK, Some(2)));
}

#[tokio::test]
async fn multipart_upload_is_created() {
    let h = Harness::new();
    let boundary = "XBOUNDARYX";
    let body = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"format\"\r\n\r\nwhitespace-triple\r\n\
         --{boundary}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"g.txt\"\r\n\
         Content-Type: text/plain\r\n\r\na b 1\nb c 2\nc a 3\n\r\n--{boundary}--\r\n"
    );
    let req = Request::post("/api/datasets")
        .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={boundary}"))
        .body(Body::from(body))
        .unwrap();
    let (s, b) = h.send(req).await;
    let v: Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(s, StatusCode::CREATED, "{v}");
    assert_eq!(v["meta"]["name"], "g.txt");
    assert_eq!(v["edges"], 3);
}

#[tokio::test]
async fn malformed_line_seven_is_named() {
    let h = Harness::new();
    let text = "0 1 1\n1 2 2\n2 3 3\n3 4 4\n4 5 5\n5 6 6\n6 seven\n7 8 8\n";
    let (s, v) = h.upload("format=whitespace-triple", text).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["line"], 7);
    assert!(v["error"].as_str().unwrap().contains("line 7"), "{v}");
    let (_, list) = h.get("/api/datasets").await;
    assert!(list.as_array().unwrap().is_empty());
}

#[tokio::test]
async fn oversized_upload_is_rejected() {
    let h = Harness::with_config(|c| c.max_upload = 64);
    let (s, _) = h.upload("format=whitespace-triple", &TOY.repeat(4)).await;
    assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn job_runs_to_success_with_full_log() {
    let h = Harness::new();
    let ds = h.dataset(TOY).await;
    let job = h.job(json!({ "dataset_id": ds, "intervals": 4 })).await;
    let record = h.wait(&job).await;
    assert_eq!(record["status"], "succeeded", "{record}");

    let (s, log) = h.get(&format!("/api/jobs/{job}/log?from=0")).await;
    assert_eq!(s, StatusCode::OK);
    let lines = log["lines"].as_array().unwrap();
    let messages: Vec<&str> = lines.iter().map(|l| l["message"].as_str().unwrap()).collect();
    for stage in ["snapshots", "dynamicity", "subgraphs", "paths", "patterns", "metrics"] {
        assert!(messages.iter().any(|m| m.starts_with(&format!("stage {stage}: done"))), "{stage} missing: {messages:?}");
    }
    assert_eq!(*messages.last().unwrap(), "status succeeded");
    assert!(lines.iter().enumerate().all(|(i, l)| l["index"] == i));
    assert_eq!(log["next"], lines.len());

    let (s, tail) = h.get(&format!("/api/jobs/{job}/log?from=999")).await;
    assert_eq!(s, StatusCode::OK);
    assert!(tail["lines"].as_array().unwrap().is_empty());
    assert_eq!(tail["next"], lines.len());
}

#[tokio::test]
async fn result_bundle_has_every_section_and_is_stable() {
    let h = Harness::new();
    let ds = h.dataset("a b 1\nb c 2\nc a 3\n").await;
    let job = h.job(json!({ "dataset_id": ds, "intervals": 2 })).await;
    assert_eq!(h.wait(&job).await["status"], "succeeded");
    let uri = format!("/api/jobs/{job}/result");
    let (s1, a) = h.send(Request::get(&uri).body(Body::empty()).unwrap()).await;
    let (s2, b) = h.send(Request::get(&uri).body(Body::empty()).unwrap()).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    let bundle: Value = serde_json::from_slice(&a).unwrap();
    for key in ["dataset", "params", "snapshots", "dynamicity", "subgraphs", "queries", "path_refs", "patterns", "evaluation"] {
        assert!(bundle.get(key).is_some(), "missing {key}");
    }
    assert!(bundle["dynamicity"]["union_hdv"].is_array());
    assert!(bundle["patterns"]["patterns"].is_array());
}

#[tokio::test]
async fn bundles_match_across_worker_counts() {
    let h = Harness::new();
    let ds = h.dataset(TOY).await;
    let mut bodies = Vec::new();
    for workers in [1, 4] {
        let job = h.job(json!({ "dataset_id": ds, "intervals": 5, "workers": workers })).await;
        assert_eq!(h.wait(&job).await["status"], "succeeded");
        bodies.push(h.send(Request::get(format!("/api/jobs/{job}/result")).body(Body::empty()).unwrap()).await.1);
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[tokio::test]
async fn config_errors_are_field_level() {
    let h = Harness::new();
    let ds = h.dataset(TOY).await;
    let (s, v) = h.post_json("/api/jobs", json!({ "dataset_id": ds, "w1": 0.9, "w2": 0.2 })).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let errors = v["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e["field"] == "w1" && e["message"].as_str().unwrap().contains("w1 + w2")), "{v}");

    let (s, v) = h.post_json("/api/jobs", json!({ "dataset_id": ds, "theta": 1.5, "workers": 0 })).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let fields: Vec<&str> = v["errors"].as_array().unwrap().iter().map(|e| e["field"].as_str().unwrap()).collect();
    assert!(fields.contains(&"theta") && fields.contains(&"workers"), "{fields:?}");

    let (s, _) = h.post_json("/api/jobs", json!({ "dataset_id": "ds-999999" })).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = h.post_json("/api/jobs", json!({ "intervals": 3 })).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn failed_job_names_stage_and_has_no_result() {
    let h = Harness::new();
    // One vertex: degree centrality is undefined, so the metrics stage fails.
    let ds = h.dataset("a a 1\na a 2\n").await;
    let job = h.job(json!({ "dataset_id": ds, "intervals": 2 })).await;
    let record = h.wait(&job).await;
    assert_eq!(record["status"], "failed");
    let (_, log) = h.get(&format!("/api/jobs/{job}/log")).await;
    let messages: Vec<&str> = log["lines"].as_array().unwrap().iter().map(|l| l["message"].as_str().unwrap()).collect();
    assert!(messages.iter().any(|m| m.starts_with("stage metrics: failed")), "{messages:?}");
    assert!(messages.last().unwrap().starts_with("status failed"));
    let (s, v) = h.get(&format!("/api/jobs/{job}/result")).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["status"], "failed");
}

#[tokio::test]
async fn unknown_entities_are_404() {
    let h = Harness::new();
    for uri in ["/api/jobs/job-000042", "/api/jobs/job-000042/log", "/api/jobs/job-000042/result", "/api/datasets/ds-1", "/api/nothing"] {
        assert_eq!(h.get(uri).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn snapshot_view_carries_hdv_and_bounds() {
    let h = Harness::new();
    let ds = h.dataset(TOY).await;
    let mut edges = Vec::new();
    for i in 0..=4 {
        let (s, v) = h.get(&format!("/api/datasets/{ds}/snapshots/{i}?intervals=4")).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["index"], i);
        assert!(v["hdv"].is_array());
        let labels: Vec<&str> = v["vertices"].as_array().unwrap().iter().map(|x| x["label"].as_str().unwrap()).collect();
        assert!(labels.iter().all(|l| !l.is_empty()));
        edges.push(v["edges"].as_array().unwrap().len());
    }
    assert!(edges.windows(2).all(|w| w[0] <= w[1]), "{edges:?}");
    assert_eq!(h.get(&format!("/api/datasets/{ds}/snapshots/5?intervals=4")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(h.get(&format!("/api/datasets/{ds}/snapshots/0?w1=0.5")).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(h.get("/api/datasets/ds-404/snapshots/0").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn restart_keeps_datasets_and_finished_jobs() {
    let mut h = Harness::new();
    let ds = h.dataset(TOY).await;
    let job = h.job(json!({ "dataset_id": ds, "intervals": 3 })).await;
    assert_eq!(h.wait(&job).await["status"], "succeeded");
    let before = h.send(Request::get(format!("/api/jobs/{job}/result")).body(Body::empty()).unwrap()).await.1;
    h.restart();
    assert_eq!(h.get(&format!("/api/datasets/{ds}")).await.0, StatusCode::OK);
    let after = h.send(Request::get(format!("/api/jobs/{job}/result")).body(Body::empty()).unwrap()).await;
    assert_eq!(after, (StatusCode::OK, before));
    let (_, log) = h.get(&format!("/api/jobs/{job}/log")).await;
    assert_eq!(log["lines"].as_array().unwrap().last().unwrap()["message"], "status succeeded");
}

#[tokio::test]
async fn root_serves_builtin_page_without_assets() {
    let h = Harness::new();
    let (s, body) = h.send(Request::get("/").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("/api/"));
}

#[tokio::test]
async fn root_serves_static_assets() {
    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<h1>dashboard</h1>").unwrap();
    std::fs::write(assets.path().join("app.js"), "console.log(1)").unwrap();
    let h = Harness::with_config(|c| c.static_dir = assets.path().to_owned());
    let (s, body) = h.send(Request::get("/").body(Body::empty()).unwrap()).await;
    assert_eq!((s, body), (StatusCode::OK, b"<h1>dashboard</h1>".to_vec()));
    let (s, body) = h.send(Request::get("/app.js").body(Body::empty()).unwrap()).await;
    assert_eq!((s, body), (StatusCode::OK, b"console.log(1)".to_vec()));
    assert_eq!(h.get("/api/datasets").await.0, StatusCode::OK);
}
