mod common;

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use sciq_cli::service::{router, AppState};
use sciq_core::indicators::Condition;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

use common::{config, mini, run_mini};

/// One pipeline run shared by every test in this file.
fn artifacts() -> &'static Path {
    static DIR: OnceLock<TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let d = tempfile::tempdir().unwrap();
        run_mini(d.path());
        d
    })
    .path()
}

/// A router over the shared artifacts with a fresh ratings store.
fn app(seed_ratings: bool) -> (Router, TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("ratings.jsonl");
    if seed_ratings {
        std::fs::copy(mini().join("ratings.jsonl"), &store).unwrap();
    }
    let cfg = config(artifacts(), Some(&store));
    let state = Arc::new(AppState::load(&cfg).unwrap());
    (router(state, None), dir, store)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
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
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

async fn first_article(app: &Router) -> String {
    let (_, list) = call(app, "GET", "/api/articles", None).await;
    list["articles"][0]["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn list_orders_per_rater_deterministically() {
    let (app, _d, _) = app(false);
    let (s, plain) = call(&app, "GET", "/api/articles", None).await;
    assert_eq!(s, StatusCode::OK);
    let n = plain["articles"].as_array().unwrap().len();
    assert!(n >= 20);
    assert!(plain.get("condition").is_none());

    let (_, a1) = call(&app, "GET", "/api/articles?rater_id=alice", None).await;
    let (_, a2) = call(&app, "GET", "/api/articles?rater_id=alice", None).await;
    let (_, b) = call(&app, "GET", "/api/articles?rater_id=bob", None).await;
    assert_eq!(a1["order"], a2["order"]);
    assert_ne!(a1["order"], b["order"]);
    let mut sorted: Vec<String> = serde_json::from_value(a1["order"].clone()).unwrap();
    sorted.sort();
    let mut plain_ids: Vec<String> = serde_json::from_value(plain["order"].clone()).unwrap();
    plain_ids.sort();
    assert_eq!(sorted, plain_ids);
    assert_eq!(a1["condition"], json!(Condition::for_rater("alice").as_str()));
}

#[tokio::test]
async fn the_condition_decides_whether_the_panel_is_shown() {
    let (app, _d, _) = app(false);
    let id = first_article(&app).await;

    let (s, with) = call(&app, "GET", &format!("/api/articles/{id}?condition=with"), None).await;
    assert_eq!(s, StatusCode::OK);
    let rows = with["indicators"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r["name"].is_string() && r["legend"].is_string()));

    let (s, without) = call(
        &app,
        "GET",
        &format!("/api/articles/{id}?condition=without_indicators"),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert!(without.get("indicators").is_none());
    assert_eq!(with["paragraphs"], without["paragraphs"]);

    // Without an explicit condition, the rater's assignment applies.
    for rater in ["r1", "r2", "r3", "r4"] {
        let (_, v) = call(&app, "GET", &format!("/api/articles/{id}?rater_id={rater}"), None).await;
        let shown = v.get("indicators").is_some();
        assert_eq!(
            shown,
            Condition::for_rater(rater) == Condition::WithIndicators,
            "{rater}"
        );
    }

    let (s, _) = call(&app, "GET", &format!("/api/articles/{id}?condition=sometimes"), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&app, "GET", &format!("/api/articles/{id}"), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&app, "GET", "/api/articles/no-such-article?condition=with", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn ratings_are_validated_and_stored_once() {
    let (app, _d, store) = app(false);
    let id = first_article(&app).await;
    let rating = |score: Value| json!({ "article_id": id, "rater_id": "carol", "condition": "with_indicators", "score": score, "timestamp": 7 });

    for bad in [json!(0), json!(6), json!("high"), json!(2.5)] {
        let (s, v) = call(&app, "POST", "/api/ratings", Some(rating(bad.clone()))).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{bad}: {v}");
    }
    let (s, _) = call(&app, "POST", "/api/ratings", Some(json!({ "article_id": id }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let unknown = json!({ "article_id": "nope", "rater_id": "carol", "condition": "with_indicators", "score": 3, "timestamp": 7 });
    let (s, _) = call(&app, "POST", "/api/ratings", Some(unknown)).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(!store.exists());

    let (s, v) = call(&app, "POST", "/api/ratings", Some(rating(json!(4)))).await;
    assert_eq!((s, v), (StatusCode::CREATED, json!({ "stored": true })));
    let (s, v) = call(&app, "POST", "/api/ratings", Some(rating(json!(2)))).await;
    assert_eq!((s, v), (StatusCode::OK, json!({ "stored": false })));

    let lines: Vec<Value> = std::fs::read_to_string(&store)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["score"], json!(4));
}

#[tokio::test]
async fn report_counts_each_rating_once() {
    let (app, _d, store) = app(true);
    let (s, before) = call(&app, "GET", "/api/report", None).await;
    assert_eq!(s, StatusCode::OK);
    let rows = before["rows"].as_array().unwrap();
    let buckets: Vec<&str> = rows.iter().map(|r| r["bucket"].as_str().unwrap()).collect();
    assert_eq!(
        buckets,
        ["strong_agreement", "weak_agreement", "disagreement", "all_articles"]
    );
    let parts: u64 = rows[..3].iter().map(|r| r["n_articles"].as_u64().unwrap()).sum();
    assert_eq!(parts, rows[3]["n_articles"].as_u64().unwrap());

    // The seeded store holds one repeated submission, which is not counted.
    let lines = std::fs::read_to_string(&store).unwrap().lines().count() as u64;
    let n = before["n_ratings"].as_u64().unwrap();
    assert_eq!(n, lines - 1);

    // Re-posting a stored rating changes nothing.
    let first: Value = serde_json::from_str(std::fs::read_to_string(&store).unwrap().lines().next().unwrap()).unwrap();
    let (s, _) = call(&app, "POST", "/api/ratings", Some(first)).await;
    assert_eq!(s, StatusCode::OK);
    let (_, again) = call(&app, "GET", "/api/report", None).await;
    assert_eq!(before, again);

    // A rating of an article with no expert labels is stored but not reported.
    let (_, list) = call(&app, "GET", "/api/articles", None).await;
    let experts = std::fs::read_to_string(mini().join("experts.tsv")).unwrap();
    let unlabeled = list["order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .find(|id| !experts.lines().any(|l| l.split('\t').next() == Some(id)))
        .unwrap()
        .to_string();
    let r = json!({ "article_id": unlabeled, "rater_id": "dave", "condition": "without_indicators", "score": 3, "timestamp": 9 });
    assert_eq!(call(&app, "POST", "/api/ratings", Some(r)).await.0, StatusCode::CREATED);
    let (_, after) = call(&app, "GET", "/api/report", None).await;
    assert_eq!(after, before);
}

#[tokio::test]
async fn report_needs_expert_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(artifacts(), Some(&dir.path().join("r.jsonl")));
    cfg.inputs.expert_labels = None;
    let app = router(Arc::new(AppState::load(&cfg).unwrap()), None);
    assert_eq!(call(&app, "GET", "/api/report", None).await.0, StatusCode::NOT_FOUND);
}

#[test]
fn loading_before_the_pipeline_ran_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), None);
    let err = AppState::load(&cfg).err().unwrap();
    assert!(format!("{err:#}").contains("run the pipeline first"), "{err:#}");
}
