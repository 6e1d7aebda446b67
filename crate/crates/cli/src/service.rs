//! JSON API for the review interface, plus static hosting of its bundle.
//!
//! Pipeline artifacts are loaded once and read-only; the ratings store is
//! the only mutable state, appended to under a mutex.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use sciq_core::corpus::{ingest_str, Article};
use sciq_core::indicators::{
    parse_expert_labels, parse_ratings, rmse_report, Condition, ExpertLabels, PanelRow, RatingRecord, StarReference,
};
use sciq_core::{fnv1a, mix_seed};

use crate::config::PipelineConfig;
use crate::pipeline::{parse_indicators, parse_scores, ratings_path, Layout};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArticleEntry {
    pub id: String,
    pub title: String,
    pub paragraphs: Vec<String>,
    pub panel: Vec<PanelRow>,
}

/// Append-only JSONL ratings with one record per (rater, article).
#[derive(Debug)]
pub struct RatingStore {
    path: PathBuf,
    records: Vec<RatingRecord>,
    keys: BTreeSet<(String, String)>,
}

impl RatingStore {
    pub fn open(path: &Path) -> Result<RatingStore> {
        let records = match fs::read_to_string(path) {
            Ok(text) => parse_ratings(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        let keys = records
            .iter()
            .map(|r| (r.rater_id.clone(), r.article_id.clone()))
            .collect();
        Ok(RatingStore {
            path: path.to_path_buf(),
            records,
            keys,
        })
    }

    /// Appends the record unless this rater already rated the article.
    /// Returns whether it was stored.
    pub fn append(&mut self, record: RatingRecord) -> Result<bool> {
        let key = (record.rater_id.clone(), record.article_id.clone());
        if self.keys.contains(&key) {
            return Ok(false);
        }
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.flush()?;
        self.keys.insert(key);
        self.records.push(record);
        Ok(true)
    }

    pub fn records(&self) -> &[RatingRecord] {
        &self.records
    }
}

pub struct AppState {
    pub articles: BTreeMap<String, ArticleEntry>,
    pub experts: Option<ExpertLabels>,
    pub automated: BTreeMap<String, f64>,
    pub store: Mutex<RatingStore>,
}

impl AppState {
    /// Loads the artifacts of a completed `indicators` stage (and `score`, if present).
    pub fn load(cfg: &PipelineConfig) -> Result<AppState> {
        let layout = Layout::new(&cfg.output_dir);
        let need = |p: PathBuf| -> Result<String> {
            fs::read_to_string(&p)
                .with_context(|| format!("missing pipeline artifact {}; run the pipeline first", p.display()))
        };
        let articles: Vec<Article> = ingest_str(&need(layout.articles())?)
            .map_err(|id| anyhow::anyhow!("duplicate article id {id}"))?
            .records;
        let vectors = parse_indicators(&need(layout.indicators_jsonl())?)?;
        let reference = StarReference::new(&vectors);
        let by_id: BTreeMap<&str, &Article> = articles.iter().map(|a| (a.id.as_str(), a)).collect();
        let entries = vectors
            .iter()
            .filter_map(|v| {
                let a = by_id.get(v.article_id.as_str())?;
                Some((
                    a.id.clone(),
                    ArticleEntry {
                        id: a.id.clone(),
                        title: a.title.clone(),
                        paragraphs: a.paragraphs.clone(),
                        panel: reference.panel(v),
                    },
                ))
            })
            .collect();
        let automated = fs::read_to_string(layout.scores())
            .map(|s| parse_scores(&s))
            .unwrap_or_default();
        let experts = match &cfg.inputs.expert_labels {
            Some(p) => Some(parse_expert_labels(
                &fs::read_to_string(p).with_context(|| p.display().to_string())?,
            )?),
            None => None,
        };
        Ok(AppState {
            articles: entries,
            experts,
            automated,
            store: Mutex::new(RatingStore::open(&ratings_path(cfg))?),
        })
    }

    /// Article ids in the order this rater should see them.
    pub fn order_for(&self, rater_id: Option<&str>) -> Vec<String> {
        let mut ids: Vec<String> = self.articles.keys().cloned().collect();
        if let Some(r) = rater_id {
            let salt = fnv1a(r.as_bytes());
            ids.sort_by_key(|id| (mix_seed(salt ^ fnv1a(id.as_bytes())), id.clone()));
        }
        ids
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    rater_id: Option<String>,
}

async fn list_articles(State(s): State<Arc<AppState>>, Query(q): Query<ListQuery>) -> Response {
    let summaries: Vec<_> = s
        .articles
        .values()
        .map(|a| json!({ "id": a.id, "title": a.title }))
        .collect();
    let mut body = json!({
        "articles": summaries,
        "order": s.order_for(q.rater_id.as_deref()),
    });
    if let Some(r) = &q.rater_id {
        body["rater_id"] = json!(r);
        body["condition"] = json!(Condition::for_rater(r).as_str());
    }
    Json(body).into_response()
}

#[derive(Debug, Deserialize)]
struct ArticleQuery {
    condition: Option<String>,
    rater_id: Option<String>,
}

fn parse_condition(s: &str) -> Option<Condition> {
    match s {
        "with" | "with_indicators" => Some(Condition::WithIndicators),
        "without" | "without_indicators" => Some(Condition::WithoutIndicators),
        _ => None,
    }
}

#[derive(Debug, Serialize)]
struct ArticleView<'a> {
    id: &'a str,
    title: &'a str,
    paragraphs: &'a [String],
    condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    indicators: Option<&'a [PanelRow]>,
}

async fn get_article(
    State(s): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ArticleQuery>,
) -> Response {
    let Some(a) = s.articles.get(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown article {id}"));
    };
    let condition = match (&q.condition, &q.rater_id) {
        (Some(c), _) => match parse_condition(c) {
            Some(c) => c,
            None => return error(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid condition {c:?}")),
        },
        (None, Some(r)) => Condition::for_rater(r),
        (None, None) => return error(StatusCode::UNPROCESSABLE_ENTITY, "condition or rater_id is required"),
    };
    Json(ArticleView {
        id: &a.id,
        title: &a.title,
        paragraphs: &a.paragraphs,
        condition,
        indicators: (condition == Condition::WithIndicators).then_some(a.panel.as_slice()),
    })
    .into_response()
}

async fn post_rating(State(s): State<Arc<AppState>>, body: Result<Json<RatingRecord>, JsonRejection>) -> Response {
    let mut record = match body {
        Ok(Json(r)) => r,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.body_text()),
    };
    if let Err(e) = record.validate() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string());
    }
    if record.rater_id.trim().is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "rater_id is empty");
    }
    if !s.articles.contains_key(&record.article_id) {
        return error(StatusCode::NOT_FOUND, format!("unknown article {}", record.article_id));
    }
    if record.timestamp == 0 {
        record.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs() as i64);
    }
    let mut store = match s.store.lock() {
        Ok(g) => g,
        Err(p) => p.into_inner(),
    };
    match store.append(record) {
        Ok(true) => (StatusCode::CREATED, Json(json!({ "stored": true }))).into_response(),
        Ok(false) => (StatusCode::OK, Json(json!({ "stored": false }))).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_report(State(s): State<Arc<AppState>>) -> Response {
    let Some(experts) = &s.experts else {
        return error(StatusCode::NOT_FOUND, "expert labels are not configured");
    };
    let ratings: Vec<RatingRecord> = {
        let store = match s.store.lock() {
            Ok(g) => g,
            Err(p) => p.into_inner(),
        };
        store
            .records()
            .iter()
            .filter(|r| experts.contains_key(&r.article_id))
            .cloned()
            .collect()
    };
    match rmse_report(&ratings, experts, Some(&s.automated)) {
        Ok(rep) => Json(rep).into_response(),
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/articles", get(list_articles))
        .route("/api/articles/{id}", get(get_article))
        .route("/api/ratings", axum::routing::post(post_rating))
        .route("/api/report", get(get_report))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(cfg: &PipelineConfig, port: u16) -> Result<()> {
    let state = Arc::new(AppState::load(cfg)?);
    let app = router(state, cfg.inputs.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .with_context(|| format!("binding port {port}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
