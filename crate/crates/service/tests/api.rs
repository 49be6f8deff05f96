use std::path::PathBuf;
use std::process::Command;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lexcomp_core::corpus::ingest_plain;
use lexcomp_core::{EmbeddingTable, LexIndex};
use lexcomp_service::{router, with_cors, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn app(with_vectors: bool) -> Router {
    let vectors = with_vectors.then(|| fixture("vectors.txt"));
    router(AppState::load(&fixture("index.tsv"), vectors.as_deref()).unwrap())
}

fn empty_app() -> Router {
    router(AppState::new(LexIndex::from_entries(1, vec![], vec![]).unwrap(), None))
}

async fn send(app: Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn get(app: Router, uri: &str) -> (StatusCode, Value) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post(app: Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    send(app, req).await
}

fn lemmas(v: &Value) -> Vec<&str> {
    v.as_array().unwrap().iter().map(|s| s["lemma"].as_str().unwrap()).collect()
}

#[tokio::test]
async fn health_reports_index_size() {
    let (status, body) = get(app(true), "/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok", "m": 10, "entries": 5, "dim": 3}));

    let (_, body) = get(app(false), "/health").await;
    assert_eq!(body["dim"], Value::Null);
}

#[tokio::test]
async fn analyze_simple_sentence_with_empty_index() {
    let (status, body) = post(empty_app(), "/analyze", json!({"text": "Per er her."}).to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["sentence_lix"], json!(3.0));
    assert_eq!(body["band"], "VeryEasy");
    let tokens = body["tokens"].as_array().unwrap();
    assert_eq!(tokens.len(), 3);
    for t in tokens {
        assert_eq!(t["cs"], Value::Null);
        assert_eq!(t["pos"], "OTHER");
        assert_eq!(t["content_word"], false);
    }
    assert_eq!(tokens[0]["surface"], "Per");
    assert_eq!(tokens[0]["lemma"], "per");
}

#[tokio::test]
async fn analyze_annotates_indexed_lemmas() {
    let (status, body) = post(app(false), "/analyze", json!({"text": "Ubehag og fly."}).to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let tokens = body["tokens"].as_array().unwrap();
    assert_eq!(tokens[0]["cs"], json!(32.0));
    assert_eq!(tokens[0]["pos"], "NOUN");
    assert_eq!(tokens[1]["cs"], Value::Null);
    // "fly" is indexed as noun (n=3) and verb (n=6); the verb wins
    assert_eq!(tokens[2]["pos"], "VERB");
    assert_eq!(tokens[2]["cs"], json!(14.4));
    assert_eq!(tokens[2]["content_word"], true);
}

#[tokio::test]
async fn analyze_accepts_annotated_tokens() {
    let body = json!({
        "tokens": [[
            {"form": "Flyene", "lemma": "fly", "upos": "NOUN"},
            {"form": "er", "lemma": "være", "upos": "AUX"},
            {"form": "her", "lemma": "her", "upos": "ADV"},
            {"form": ".", "lemma": ".", "upos": "PUNCT"}
        ]]
    });
    let (status, body) = post(app(false), "/analyze", body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let tokens = body["tokens"].as_array().unwrap();
    assert_eq!(tokens.len(), 3);
    assert_eq!(tokens[0]["cs"], json!(21.0));
    assert_eq!(tokens[1]["pos"], "VERB");
    assert_eq!(tokens[1]["content_word"], true);
    assert_eq!(tokens[1]["cs"], Value::Null);
    assert_eq!(tokens[2]["cs"], Value::Null);
    assert_eq!(body["sentence_lix"], json!(3.0));
}

#[tokio::test]
async fn analyze_rejects_bad_bodies() {
    for body in ["", "{", "{\"text\": \"\"}", "{\"text\": \"... !!\"}", "{\"text\": 3}"] {
        let (status, value) = post(app(false), "/analyze", body.to_string()).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "body {body:?}");
        assert!(value["error"].is_string());
    }
}

#[tokio::test]
async fn analyze_lix_matches_plain_ingestion_bit_for_bit() {
    let text = "Undulaten satt stille i buret. Etterpå fløy den rundt i stuen, forbi vinduet og bokhyllen!";
    let expected = ingest_plain(text, "d", "x").unwrap().stats.lix;
    let (_, body) = post(empty_app(), "/analyze", json!({ "text": text }).to_string()).await;
    assert_eq!(body["sentence_lix"].as_f64().unwrap().to_bits(), expected.to_bits());
}

#[tokio::test]
async fn suggest_mirrors_library_fixture() {
    let (status, body) = get(app(true), "/suggest?lemma=ubehag&k=3").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(lemmas(&body), vec!["ubehag", "smerte", "stress"]);
    assert_eq!(body[0]["cosine_similarity"], json!(1.0));
    let cs: Vec<f64> = body.as_array().unwrap()[1..].iter().map(|s| s["cs"].as_f64().unwrap()).collect();
    assert_eq!(cs, vec![20.0, 30.0]);

    let (_, body) = get(app(true), "/suggest?lemma=ubehag&k=3&exclude=Smerte").await;
    assert_eq!(lemmas(&body), vec!["ubehag", "stress"]);
}

#[tokio::test]
async fn suggest_error_statuses() {
    let (status, _) = get(app(true), "/suggest?lemma=plage&k=3").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = get(app(false), "/suggest?lemma=ubehag").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, body) = get(app(true), "/suggest?lemma=ubehag&k=4&exclude=smerte,stress,plage,bil").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
    let (status, _) = get(app(true), "/suggest?lemma=ubehag&k=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(app(true), "/suggest?k=3").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(app(true), "/suggest?lemma=ubehag&pos=XYZ").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn lemma_lookup() {
    let (status, body) = get(app(false), "/lemma/fly").await;
    assert_eq!(status, StatusCode::OK);
    let pos: Vec<&str> = body.as_array().unwrap().iter().map(|e| e["pos"].as_str().unwrap()).collect();
    assert_eq!(pos, vec!["NOUN", "VERB"]);

    let (status, body) = get(app(false), "/lemma/Smerte").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([{"lemma": "smerte", "pos": "NOUN", "n": 5, "median_lix": 40.0, "cs": 20.0}]));

    let (_, body) = get(app(false), "/lemma/fly?pos=VERB").await;
    assert_eq!(body.as_array().unwrap().len(), 1);

    let (status, _) = get(app(false), "/lemma/ukjent").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn identical_requests_identical_responses() {
    let a = get(app(true), "/suggest?lemma=ubehag&k=4").await;
    let b = get(app(true), "/suggest?lemma=ubehag&k=4").await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn cors_header_only_when_enabled() {
    let req = || {
        Request::get("/health")
            .header("origin", "http://localhost:5173")
            .body(Body::empty())
            .unwrap()
    };
    let resp = app(false).oneshot(req()).await.unwrap();
    assert!(resp.headers().get("access-control-allow-origin").is_none());

    let cors = with_cors(app(false), "http://localhost:5173").unwrap();
    let resp = cors.oneshot(req()).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://localhost:5173");
}

#[test]
fn loaded_fixture_matches_files() {
    let state = AppState::load(&fixture("index.tsv"), Some(&fixture("vectors.txt"))).unwrap();
    assert_eq!(state.index.m(), 10);
    let table = EmbeddingTable::load(&fixture("vectors.txt")).unwrap();
    assert_eq!(table.len(), 5);
}

#[test]
fn malformed_index_exits_before_serving() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "#m=2\tcorpora=x\nord\tNOUN\t5\t30\t0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lexcomp-serve"))
        .arg("--index")
        .arg(&bad)
        .env("LEXCOMP_PORT", "0")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.tsv"));

    let out = Command::new(env!("CARGO_BIN_EXE_lexcomp-serve"))
        .arg("--index")
        .arg(dir.path().join("missing.tsv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}
