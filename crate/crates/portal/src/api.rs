//! JSON HTTP API.
//!
//! | method        | path                                   |
//! |---------------|----------------------------------------|
//! | GET           | `/healthz`                             |
//! | GET           | `/api/search`                          |
//! | GET           | `/api/papers/{id}`                     |
//! | GET           | `/api/users/{uid}/collection`          |
//! | PUT, DELETE   | `/api/users/{uid}/collection/{id}`     |
//! | GET           | `/thumbs/{id}.png`                     |
//!
//! Bodies are JSON with sorted object keys and RFC 3339 UTC timestamps.
//! Every 4xx carries `{"code", "message"}`; 5xx bodies never include
//! internal detail.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use portal_core::{
    search, AddOutcome, ArxivId, CollectionError, FieldMask, PaperRecord, RankedHit, RemoveOutcome,
    SearchError, SearchQuery, SortKey, SortMode, TimeRange, Timestamp,
};
use serde_json::{json, Value};

use crate::config::Config;
use crate::state::{DataDir, Portal, PortalState};
use crate::timefmt;

pub type Clock = Arc<dyn Fn() -> Timestamp + Send + Sync>;

pub struct AppState {
    pub portal: Arc<Portal>,
    pub config: Config,
    /// Where collection changes are persisted; `None` keeps them in memory.
    pub data_dir: Option<DataDir>,
    pub clock: Clock,
}

impl AppState {
    pub fn new(portal: Arc<Portal>, config: Config, data_dir: Option<DataDir>) -> Self {
        AppState {
            portal,
            config,
            data_dir,
            clock: Arc::new(timefmt::now),
        }
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.into(),
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            code,
            message: message.into(),
        }
    }

    fn internal(detail: impl std::fmt::Display) -> Self {
        tracing::error!(%detail, "request failed");
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: "internal error".into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "code": self.code, "message": self.message })),
        )
            .into_response()
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::bad_request("invalid_path", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request("invalid_query", e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/search", get(handle_search))
        .route("/api/papers/*id", get(handle_paper_detail))
        .route("/api/users/:uid/collection", get(handle_list_collection))
        .route(
            "/api/users/:uid/collection/*id",
            axum::routing::put(handle_add).delete(handle_remove),
        )
        .route("/thumbs/*file", get(serve_thumbnail))
        .fallback(|| async { ApiError::not_found("not_found", "no such endpoint") })
        .with_state(state)
}

fn parse_id(raw: &str) -> ApiResult<ArxivId> {
    ArxivId::parse(raw).map_err(|_| {
        ApiError::bad_request(
            "invalid_identifier",
            format!("not an arXiv identifier: {raw:?}"),
        )
    })
}

fn parse_user(raw: &str) -> ApiResult<&str> {
    if raw.is_empty() || raw.len() > 128 || raw.chars().any(char::is_control) {
        return Err(ApiError::bad_request(
            "invalid_user",
            "user id must be 1-128 printable characters",
        ));
    }
    Ok(raw)
}

/// Turns `/api/search` parameters into a [`SearchQuery`].
pub fn parse_search_params(
    params: &HashMap<String, String>,
    config: &Config,
) -> ApiResult<SearchQuery> {
    let mut query = SearchQuery {
        text: params.get("q").cloned().unwrap_or_default(),
        ..SearchQuery::default()
    };

    if let Some(fields) = params.get("fields").filter(|f| !f.trim().is_empty()) {
        let mut mask = FieldMask::from_fields([]);
        for name in fields.split(',').map(str::trim) {
            let field = portal_core::Field::from_name(name).ok_or_else(|| {
                ApiError::bad_request("invalid_fields", format!("unknown field {name:?}"))
            })?;
            mask = mask.with(field);
        }
        query.fields = mask;
    }

    if let Some(sort) = params.get("sort") {
        query.sort = SortMode::from_name(sort).ok_or_else(|| {
            ApiError::bad_request(
                "invalid_sort",
                format!("sort must be one of date, twitter, collection, relevance; got {sort:?}"),
            )
        })?;
    }

    let instant = |key: &str| -> ApiResult<Option<Timestamp>> {
        params
            .get(key)
            .map(|v| {
                timefmt::parse_rfc3339(v).ok_or_else(|| {
                    ApiError::bad_request(
                        "invalid_timestamp",
                        format!("{key} must be an RFC 3339 timestamp"),
                    )
                })
            })
            .transpose()
    };
    let (from, to) = (instant("from")?, instant("to")?);
    if from.is_some() || to.is_some() {
        let start = from.unwrap_or(Timestamp(i64::MIN));
        let end = to.unwrap_or(Timestamp(i64::MAX));
        query.time_range = Some(
            TimeRange::new(start, end)
                .map_err(|_| ApiError::bad_request("invalid_range", "from must be before to"))?,
        );
    }

    let number = |key: &str, code: &'static str| -> ApiResult<Option<u32>> {
        params
            .get(key)
            .map(|v| {
                v.parse::<u32>().map_err(|_| {
                    ApiError::bad_request(code, format!("{key} must be a positive integer"))
                })
            })
            .transpose()
    };
    query.page = number("page", "invalid_page")?.unwrap_or(1);
    if query.page == 0 {
        return Err(ApiError::bad_request(
            "invalid_page",
            "page must be at least 1",
        ));
    }
    query.per_page = number("per_page", "invalid_per_page")?.unwrap_or(config.default_per_page);
    if query.per_page == 0 || query.per_page > config.max_per_page {
        return Err(ApiError::bad_request(
            "invalid_per_page",
            format!("per_page must be within 1..={}", config.max_per_page),
        ));
    }
    Ok(query)
}

fn sort_key_json(key: &SortKey) -> Value {
    match key {
        SortKey::Date(t) => json!(timefmt::rfc3339(*t)),
        SortKey::Mentions(n) | SortKey::Collections(n) => json!(n),
        SortKey::Score(s) => json!(s),
    }
}

fn thumbnail_url(state: &PortalState, id: &ArxivId) -> Option<String> {
    state
        .thumbnail_status(id)
        .is_done()
        .then(|| format!("/thumbs/{id}.png"))
}

fn hit_json(state: &PortalState, hit: &RankedHit) -> ApiResult<Value> {
    let record = state.papers.get(&hit.arxiv_id).ok_or_else(|| {
        ApiError::internal(format!("indexed paper {} missing from store", hit.arxiv_id))
    })?;
    let mut v = json!({
        "arxiv_id": record.arxiv_id.as_str(),
        "title": record.title,
        "authors": record.authors,
        "categories": record.categories,
        "abstract": record.abstract_text,
        "latest_date": timefmt::rfc3339(record.latest_date()),
        "relevance_score": hit.relevance_score,
        "sort_key": sort_key_json(&hit.sort_key),
        "mention_count": state.mentions.mention_count(&hit.arxiv_id, None),
        "collection_count": state.collections.collection_count(&hit.arxiv_id),
    });
    if let Some(url) = thumbnail_url(state, &hit.arxiv_id) {
        v["thumbnail_url"] = json!(url);
    }
    Ok(v)
}

async fn handle_search(
    State(app): State<Arc<AppState>>,
    params: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(params) = params?;
    let query = parse_search_params(&params, &app.config)?;
    let state = app.portal.read();
    let results = search(&state.index, &query, &(&state.mentions, &state.collections)).map_err(
        |e| match e {
            SearchError::InvalidQuery(why) => ApiError::bad_request("invalid_query", why),
            other => ApiError::internal(other),
        },
    )?;
    let hits = results
        .hits
        .iter()
        .map(|h| hit_json(&state, h))
        .collect::<ApiResult<Vec<_>>>()?;
    Ok(Json(json!({
        "total": results.total,
        "page": query.page,
        "per_page": query.per_page,
        "hits": hits,
    })))
}

fn pdf_url(config: &Config, record: &PaperRecord) -> String {
    format!(
        "{}/{}v{}",
        config.pdf_base_url.trim_end_matches('/'),
        record.arxiv_id,
        record.latest_version()
    )
}

async fn handle_paper_detail(
    State(app): State<Arc<AppState>>,
    id: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<Value>> {
    let Path(raw) = id?;
    let id = parse_id(&raw)?;
    let state = app.portal.read();
    let record = state
        .papers
        .get(&id)
        .ok_or_else(|| ApiError::not_found("unknown_paper", format!("no paper {id}")))?;
    let mentions: Vec<Value> = state
        .mentions
        .mentions_for(&id, app.config.mention_links_cap)
        .into_iter()
        .map(|m| {
            let mut v = json!({
                "tweet_id": m.tweet_id,
                "url": m.url,
                "timestamp": timefmt::rfc3339(m.timestamp),
            });
            if let Some(handle) = &m.author_handle {
                v["author_handle"] = json!(handle);
            }
            v
        })
        .collect();
    let versions: Vec<Value> = record
        .versions
        .iter()
        .map(|v| json!({ "version": v.version_number, "submitted_at": timefmt::rfc3339(v.submitted_at) }))
        .collect();
    let mut detail = json!({
        "arxiv_id": id.as_str(),
        "title": record.title,
        "authors": record.authors,
        "abstract": record.abstract_text,
        "categories": record.categories,
        "primary_category": record.primary_category(),
        "versions": versions,
        "latest_version": record.latest_version(),
        "latest_date": timefmt::rfc3339(record.latest_date()),
        "mentions": mentions,
        "mention_count": state.mentions.mention_count(&id, None),
        "collection_count": state.collections.collection_count(&id),
        "pdf_url": pdf_url(&app.config, record),
    });
    if let Some(url) = thumbnail_url(&state, &id) {
        detail["thumbnail_url"] = json!(url);
    }
    Ok(Json(detail))
}

async fn handle_list_collection(
    State(app): State<Arc<AppState>>,
    uid: Result<Path<String>, PathRejection>,
) -> ApiResult<Json<Value>> {
    let Path(uid) = uid?;
    let uid = parse_user(&uid)?;
    let state = app.portal.read();
    let items: Vec<Value> = state
        .collections
        .list(uid)
        .into_iter()
        .map(|(id, at)| json!({ "arxiv_id": id.as_str(), "added_at": timefmt::rfc3339(at) }))
        .collect();
    Ok(Json(json!({ "user_id": uid, "items": items })))
}

fn persist_collections(app: &AppState, state: &PortalState) -> ApiResult<()> {
    match &app.data_dir {
        Some(dir) => state.save_collections(dir).map_err(ApiError::internal),
        None => Ok(()),
    }
}

async fn handle_add(
    State(app): State<Arc<AppState>>,
    path: Result<Path<(String, String)>, PathRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Path((uid, raw)) = path?;
    let uid = parse_user(&uid)?;
    let id = parse_id(&raw)?;
    let now = (app.clock)();
    let mut guard = app.portal.write();
    let state = &mut *guard;
    let outcome = state
        .collections
        .add(uid, &id, now, &state.papers)
        .map_err(|e| match e {
            CollectionError::UnknownPaper(id) => {
                ApiError::not_found("unknown_paper", format!("no paper {id}"))
            }
            CollectionError::EmptyUser => {
                ApiError::bad_request("invalid_user", "user id must not be empty")
            }
        })?;
    let status = match outcome {
        AddOutcome::Added => {
            persist_collections(&app, state)?;
            StatusCode::CREATED
        }
        AddOutcome::AlreadyPresent => StatusCode::OK,
    };
    let body = json!({
        "arxiv_id": id.as_str(),
        "status": if outcome == AddOutcome::Added { "added" } else { "already_present" },
        "collection_count": state.collections.collection_count(&id),
    });
    Ok((status, Json(body)))
}

async fn handle_remove(
    State(app): State<Arc<AppState>>,
    path: Result<Path<(String, String)>, PathRejection>,
) -> ApiResult<Json<Value>> {
    let Path((uid, raw)) = path?;
    let uid = parse_user(&uid)?;
    let id = parse_id(&raw)?;
    let mut state = app.portal.write();
    match state.collections.remove(uid, &id) {
        RemoveOutcome::Removed => {
            persist_collections(&app, &state)?;
            Ok(Json(json!({
                "arxiv_id": id.as_str(),
                "status": "removed",
                "collection_count": state.collections.collection_count(&id),
            })))
        }
        RemoveOutcome::NotPresent => Err(ApiError::not_found(
            "not_present",
            format!("{id} is not in the collection"),
        )),
    }
}

async fn serve_thumbnail(
    State(app): State<Arc<AppState>>,
    file: Result<Path<String>, PathRejection>,
) -> ApiResult<Response> {
    let Path(file) = file?;
    let raw = file.strip_suffix(".png").ok_or_else(|| {
        ApiError::bad_request("invalid_identifier", "thumbnail paths end in .png")
    })?;
    let id = parse_id(raw)?;
    let missing = || ApiError::not_found("not_found", format!("no thumbnail for {id}"));
    let done = app.portal.read().thumbnail_status(&id).is_done();
    let dir = app.data_dir.as_ref().filter(|_| done).ok_or_else(missing)?;
    let bytes = tokio::fs::read(dir.thumb_file(&id))
        .await
        .map_err(|_| missing())?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png"),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
        ],
        bytes,
    )
        .into_response())
}

/// Binds `config.listen` and serves until the process is stopped.
pub async fn serve(app: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(app.config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(app)).await
}
