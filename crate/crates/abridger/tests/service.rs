use std::path::PathBuf;

use abridger::formats::{chapter_records, write_jsonl};
use abridger::ops::align_pairs;
use abridger::service::{router, AppState, RowView};
use abridger::store::{ChapterSummary, RowStore};
use abridger_core::review::ReviewConfig;
use abridger_core::text::Document;
use abridger_core::{AlignerConfig, ChapterPair};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const ORIGINAL: &str = "Alpha beta gamma. Delta epsilon zeta. Eta theta iota. Kappa lambda mu. Nu xi omicron.";
const ABRIDGED: &str = "Alpha beta. Delta epsilon zeta and theta. Kappa lambda. Nu xi omicron.";

struct Files {
    _dir: tempfile::TempDir,
    chapters: PathBuf,
    rows: PathBuf,
    log: PathBuf,
}

fn files() -> Files {
    let dir = tempfile::tempdir().unwrap();
    let pairs = vec![
        ChapterPair {
            book_id: "b".into(),
            chapter_id: "Chapter 1".into(),
            original: Document::new("Chapter 1", ORIGINAL),
            abridged: Document::new("Chapter 1", ABRIDGED),
        },
        ChapterPair {
            book_id: "b".into(),
            chapter_id: "c2".into(),
            original: Document::new("c2", "Same words here. More words there."),
            abridged: Document::new("c2", "Same words here. More words there."),
        },
    ];
    let f = Files {
        chapters: dir.path().join("chapters.jsonl"),
        rows: dir.path().join("rows.jsonl"),
        log: dir.path().join("corrections.jsonl"),
        _dir: dir,
    };
    write_jsonl(&f.chapters, &chapter_records(&pairs)).unwrap();
    write_jsonl(&f.rows, &align_pairs(&pairs, &AlignerConfig::default(), 0.9).unwrap()).unwrap();
    f
}

fn app(f: &Files) -> Router {
    let store = RowStore::open(&f.chapters, &f.rows, &f.log, ReviewConfig::default()).unwrap();
    router(AppState::new(store), None)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_of<T: serde::de::DeserializeOwned>(app: &Router, uri: &str) -> T {
    let (status, body) = call(app, "GET", uri, None).await;
    assert_eq!(status, StatusCode::OK, "{uri}: {}", String::from_utf8_lossy(&body));
    serde_json::from_slice(&body).unwrap()
}

fn spans(rows: &[RowView]) -> Vec<(usize, usize, usize, usize)> {
    rows.iter().map(|r| (r.o_start, r.o_len, r.a_start, r.a_len)).collect()
}

#[tokio::test]
async fn chapter_list_reflects_the_store() {
    let f = files();
    let app = app(&f);
    let chapters: Vec<Value> = json_of(&app, "/api/chapters").await;
    assert_eq!(chapters.len(), 2);
    assert_eq!(chapters[0]["chapter_id"], "Chapter 1");
    assert_eq!(chapters[0]["row_count"], 5);
    assert_eq!(chapters[0]["flagged_count"], 1);
    assert_eq!(chapters[0]["validated_count"], 0);
    assert_eq!(chapters[1]["flagged_count"], 0);
}

#[tokio::test]
async fn flagged_filter_and_span_texts() {
    let f = files();
    let app = app(&f);
    let all: Vec<RowView> = json_of(&app, "/api/chapters/Chapter%201/rows").await;
    assert_eq!(
        spans(&all),
        vec![(0, 1, 0, 1), (1, 1, 1, 1), (2, 1, 2, 0), (3, 1, 2, 1), (4, 1, 3, 1)]
    );
    let flagged: Vec<RowView> = json_of(&app, "/api/chapters/Chapter%201/rows?flagged=true").await;
    assert!(flagged.iter().all(|r| r.flagged));
    assert_eq!(spans(&flagged), vec![(1, 1, 1, 1)]);
    assert_eq!(flagged[0].row_index, 1);
    assert_eq!(all[1].original[0].text, "Delta epsilon zeta.");
    assert_eq!(all[1].abridged[0].text, "Delta epsilon zeta and theta.");
    assert!(all[2].abridged.is_empty());
}

#[tokio::test]
async fn text_endpoint() {
    let f = files();
    let app = app(&f);
    let v: Value = json_of(&app, "/api/chapters/c2/text?side=abridged").await;
    assert_eq!(v["text"], "Same words here. More words there.");
    assert_eq!(v["sentence_spans"], json!([[0, 16], [17, 34]]));
    let (status, _) = call(&app, "GET", "/api/chapters/c2/text?side=middle", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn correction_round_trip_survives_restart() {
    let f = files();
    let app1 = app(&f);
    let body = json!({"kind": "move_sentence", "side": "abridged", "sent_index": 2, "source_row": 3, "target_row": 2});
    let (status, resp) = call(&app1, "POST", "/api/chapters/Chapter%201/corrections", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&resp));
    let returned: Vec<RowView> = serde_json::from_slice(&resp).unwrap();
    assert_eq!(spans(&returned)[2..4], [(2, 1, 2, 1), (3, 1, 3, 0)]);
    assert!((returned[2].score - 1.0 / 3.0).abs() < 1e-12);

    let approve = json!({"chapter_id": "Chapter 1", "kind": "approve", "source_row": 0, "validator_id": "v1"});
    assert_eq!(
        call(&app1, "POST", "/api/chapters/Chapter%201/corrections", Some(approve))
            .await
            .0,
        StatusCode::OK
    );
    let served: Vec<RowView> = json_of(&app1, "/api/chapters/Chapter%201/rows").await;
    assert_eq!(spans(&served), spans(&returned));
    assert!(served[0].validated);
    let (_, export1) = call(&app1, "GET", "/api/export", None).await;
    drop(app1);

    let app2 = app(&f);
    let (_, export2) = call(&app2, "GET", "/api/export", None).await;
    assert_eq!(export1, export2);
    let summaries: Vec<ChapterSummary> = json_of::<Vec<Value>>(&app2, "/api/chapters")
        .await
        .into_iter()
        .map(summary)
        .collect();
    assert_eq!(summaries[0].validated_count, 1);
    let log = std::fs::read_to_string(&f.log).unwrap();
    assert_eq!(log.lines().count(), 2);
    assert!(log.contains("\"timestamp\""));
}

fn summary(v: Value) -> ChapterSummary {
    ChapterSummary {
        chapter_id: v["chapter_id"].as_str().unwrap().into(),
        book_id: v["book_id"].as_str().unwrap().into(),
        row_count: v["row_count"].as_u64().unwrap() as usize,
        flagged_count: v["flagged_count"].as_u64().unwrap() as usize,
        validated_count: v["validated_count"].as_u64().unwrap() as usize,
    }
}

#[tokio::test]
async fn bad_corrections_are_refused_without_logging() {
    let f = files();
    let app = app(&f);
    let uri = "/api/chapters/Chapter%201/corrections";
    let criss_cross =
        json!({"kind": "move_sentence", "side": "abridged", "sent_index": 0, "source_row": 0, "target_row": 2});
    assert_eq!(call(&app, "POST", uri, Some(criss_cross)).await.0, StatusCode::CONFLICT);
    let missing_row = json!({"kind": "approve", "source_row": 40});
    assert_eq!(
        call(&app, "POST", uri, Some(missing_row)).await.0,
        StatusCode::NOT_FOUND
    );
    let other_chapter = json!({"chapter_id": "c2", "kind": "approve", "source_row": 0});
    assert_eq!(
        call(&app, "POST", uri, Some(other_chapter)).await.0,
        StatusCode::BAD_REQUEST
    );
    let unknown_kind = json!({"kind": "rewrite", "source_row": 0});
    assert_eq!(
        call(&app, "POST", uri, Some(unknown_kind)).await.0,
        StatusCode::BAD_REQUEST
    );
    let nowhere = json!({"kind": "approve", "source_row": 0});
    assert_eq!(
        call(&app, "POST", "/api/chapters/none/corrections", Some(nowhere))
            .await
            .0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        call(&app, "GET", "/api/chapters/none/rows", None).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(std::fs::read_to_string(&f.log).unwrap(), "");
}

#[tokio::test]
async fn export_matches_rows_file_before_any_correction() {
    let f = files();
    let app = app(&f);
    let (status, body) = call(&app, "GET", "/api/export", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, std::fs::read(&f.rows).unwrap());
}

#[tokio::test]
async fn ui_assets_are_served_outside_the_api() {
    let f = files();
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<h1>review</h1>").unwrap();
    let store = RowStore::open(&f.chapters, &f.rows, &f.log, ReviewConfig::default()).unwrap();
    let app = router(AppState::new(store), Some(ui.path().into()));
    let (status, body) = call(&app, "GET", "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<h1>review</h1>");
    assert_eq!(call(&app, "GET", "/api/chapters", None).await.0, StatusCode::OK);
}

#[tokio::test]
async fn port_in_use_is_a_startup_error() {
    let taken = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let port = taken.local_addr().unwrap().port();
    assert!(abridger::service::bind(port).await.is_err());
}
