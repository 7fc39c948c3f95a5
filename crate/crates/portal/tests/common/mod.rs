//! The seeded fixture store shared by the API, CLI and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use portal::api::{self, AppState};
use portal::config::Config;
use portal::state::{DataDir, Portal, PortalState};
use portal::thumbs::compose_strip;
use portal::timefmt;
use portal_core::{
    ArxivId, CollectionEntry, MentionEvent, PaperRecord, ThumbnailStatus, Timestamp, VersionInfo,
};
use portal_testkit::corpus::{collection_entries, mention_events, rng, Corpus, CorpusSpec};
use tower::ServiceExt;

pub const FIXED_NOW: &str = "2018-01-15T12:00:00Z";

pub fn ts(rfc3339: &str) -> Timestamp {
    timefmt::parse_rfc3339(rfc3339).expect("fixture timestamp")
}

pub fn id(s: &str) -> ArxivId {
    ArxivId::parse(s).unwrap()
}

fn paper(
    arxiv_id: &str,
    versions: &[&str],
    title: &str,
    authors: &[&str],
    categories: &[&str],
    abstract_text: &str,
) -> PaperRecord {
    PaperRecord {
        arxiv_id: id(arxiv_id),
        versions: versions
            .iter()
            .enumerate()
            .map(|(i, t)| VersionInfo {
                version_number: i as u32 + 1,
                submitted_at: ts(t),
            })
            .collect(),
        title: title.into(),
        authors: authors.iter().map(|a| a.to_string()).collect(),
        abstract_text: abstract_text.into(),
        categories: categories.iter().map(|c| c.to_string()).collect(),
    }
}

pub fn handcrafted_papers() -> Vec<PaperRecord> {
    vec![
        paper(
            "1712.00001",
            &["2017-11-20T10:00:00Z", "2017-12-01T09:30:00Z"],
            "Quantum error correction with surface codes",
            &["Alice Smith", "Bob Jones"],
            &["quant-ph", "cs.IT"],
            "We study surface codes under circuit-level noise and report thresholds.",
        ),
        paper(
            "1712.00002",
            &["2017-12-01T00:00:00Z"],
            "Deep learning for quantum chemistry",
            &["Carol Chen"],
            &["cs.LG", "physics.chem-ph"],
            "Neural networks predict molecular energies.",
        ),
        paper(
            "1712.00003",
            &["2017-12-02T00:00:00Z"],
            "A survey of scholarly search engines",
            &["Dan Brown", "Eve Black", "Frank White"],
            &["cs.IR", "cs.DL"],
            "",
        ),
        paper(
            "hep-th/9901001",
            &["1999-01-05T00:00:00Z"],
            "Quantum gravity in two dimensions",
            &["G. Legacy"],
            &["hep-th"],
            "Classic legacy-identifier paper.",
        ),
    ]
}

fn mention(tweet_id: &str, arxiv_id: &str, at: &str, handle: Option<&str>) -> MentionEvent {
    MentionEvent {
        tweet_id: tweet_id.into(),
        arxiv_id: id(arxiv_id),
        timestamp: ts(at),
        url: format!("https://twitter.com/i/web/status/{tweet_id}"),
        author_handle: handle.map(str::to_owned),
    }
}

pub fn handcrafted_mentions() -> Vec<MentionEvent> {
    vec![
        mention(
            "937000000000000001",
            "1712.00001",
            "2017-12-01T12:00:00Z",
            Some("qec_fan"),
        ),
        mention(
            "937000000000000002",
            "1712.00001",
            "2017-12-01T18:00:00Z",
            None,
        ),
        mention(
            "937000000000000003",
            "1712.00001",
            "2017-12-03T08:00:00Z",
            Some("physbot"),
        ),
        mention(
            "937000000000000004",
            "1712.00002",
            "2017-12-01T05:00:00Z",
            None,
        ),
    ]
}

/// Everything the fixture store is built from, kept raw for the oracles.
pub struct Fixture {
    pub papers: Vec<PaperRecord>,
    pub mentions: Vec<MentionEvent>,
    pub collections: Vec<CollectionEntry>,
    pub vocabulary: Vec<String>,
    pub done_thumbnail: ArxivId,
}

pub fn fixture() -> Fixture {
    let corpus = Corpus::generate(
        &CorpusSpec {
            papers: 200,
            ..CorpusSpec::default()
        },
        42,
    );
    let mut papers = handcrafted_papers();
    papers.extend(corpus.papers);
    let ids: Vec<ArxivId> = papers.iter().map(|p| p.arxiv_id.clone()).collect();
    let mut r = rng(43);
    let mut mentions = handcrafted_mentions();
    // synthetic chatter starts after the hand-written window
    mentions.extend(mention_events(
        &mut r,
        &ids[4..],
        400,
        40,
        ts("2017-12-04T00:00:00Z").0,
        20 * Timestamp::DAY,
    ));
    let mut collections = vec![
        CollectionEntry {
            user_id: "alice".into(),
            arxiv_id: id("1712.00001"),
            added_at: ts("2018-01-02T08:00:00Z"),
        },
        CollectionEntry {
            user_id: "alice".into(),
            arxiv_id: id("1712.00002"),
            added_at: ts("2018-01-03T08:00:00Z"),
        },
        CollectionEntry {
            user_id: "bob".into(),
            arxiv_id: id("1712.00001"),
            added_at: ts("2018-01-04T08:00:00Z"),
        },
    ];
    collections.extend(collection_entries(
        &mut r,
        &ids,
        25,
        150,
        ts("2018-01-05T00:00:00Z").0,
    ));
    Fixture {
        papers,
        mentions,
        collections,
        vocabulary: corpus.vocabulary,
        done_thumbnail: id("1712.00001"),
    }
}

/// Builds the fixture store in `dir` and returns it loaded.
pub fn fixture_state(dir: &DataDir) -> (Fixture, PortalState) {
    let f = fixture();
    let mut state = PortalState::default();
    for p in &f.papers {
        state.upsert_paper(p.clone()).unwrap();
    }
    for m in &f.mentions {
        state.mentions.insert(m.clone());
    }
    for c in &f.collections {
        state
            .collections
            .add(&c.user_id, &c.arxiv_id, c.added_at, &state.papers)
            .unwrap();
    }
    let page = image::DynamicImage::ImageRgba8(image::RgbaImage::from_pixel(
        24,
        32,
        image::Rgba([200, 200, 200, 255]),
    ));
    let png = compose_strip(&[page.clone(), page]).unwrap();
    let path = dir.thumb_file(&f.done_thumbnail);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, png).unwrap();
    state.thumbnails.insert(
        f.done_thumbnail.clone(),
        ThumbnailStatus::Done {
            generated_at: ts("2018-01-10T00:00:00Z"),
        },
    );
    state.thumbnails.insert(
        id("1712.00002"),
        ThumbnailStatus::Failed {
            reason: "rasterizer".into(),
        },
    );
    state.save_all(dir).unwrap();
    let loaded = PortalState::load(dir).unwrap();
    (f, loaded)
}

pub fn app(state: PortalState, dir: &DataDir) -> Router {
    let now = ts(FIXED_NOW);
    let app = AppState::new(
        Arc::new(Portal::new(state)),
        Config::default(),
        Some(dir.clone()),
    )
    .with_clock(Arc::new(move || now));
    api::router(Arc::new(app))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| {
            panic!(
                "non-JSON body ({e}): {}",
                String::from_utf8_lossy(&self.body)
            )
        })
    }
}

pub async fn call(router: &Router, method: Method, uri: &str) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::empty())
        .unwrap();
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    Reply {
        status,
        headers,
        body,
    }
}

/// Requests covered by golden files, in replay order (the mutating ones
/// depend on their predecessors).
pub const GOLDEN_REQUESTS: &[(&str, &str, &str)] = &[
    ("healthz", "GET", "/healthz"),
    ("search_browse_default", "GET", "/api/search"),
    ("search_date_page2", "GET", "/api/search?sort=date&per_page=5&page=2"),
    ("search_quantum_title_relevance", "GET", "/api/search?q=quantum&fields=title&sort=relevance"),
    ("search_quantum_all_fields_date", "GET", "/api/search?q=quantum&per_page=10"),
    ("search_twitter_window", "GET", "/api/search?sort=twitter&from=2017-12-01T00:00:00Z&to=2017-12-02T00:00:00Z"),
    ("search_twitter_all_time", "GET", "/api/search?sort=twitter&per_page=5"),
    ("search_collection", "GET", "/api/search?sort=collection&per_page=5"),
    ("search_relevance_date_window", "GET", "/api/search?q=gauge+quantum&sort=relevance&from=2017-11-01T00:00:00Z&to=2017-12-02T00:00:00Z"),
    ("search_fields_authors", "GET", "/api/search?q=smith&fields=authors&sort=relevance&per_page=3"),
    ("search_past_last_page", "GET", "/api/search?q=quantum&page=9"),
    ("search_bad_sort", "GET", "/api/search?sort=hotness"),
    ("search_bad_fields", "GET", "/api/search?fields=title,body"),
    ("search_bad_timestamp", "GET", "/api/search?sort=twitter&from=yesterday"),
    ("search_empty_range", "GET", "/api/search?from=2017-12-02T00:00:00Z&to=2017-12-01T00:00:00Z"),
    ("search_bad_per_page", "GET", "/api/search?per_page=101"),
    ("search_bad_page", "GET", "/api/search?page=0"),
    ("paper_detail", "GET", "/api/papers/1712.00001"),
    ("paper_detail_legacy", "GET", "/api/papers/hep-th/9901001"),
    ("paper_unknown", "GET", "/api/papers/1712.99999"),
    ("paper_malformed", "GET", "/api/papers/..%2F.."),
    ("collection_alice", "GET", "/api/users/alice/collection"),
    ("collection_empty_user", "GET", "/api/users/nobody/collection"),
    ("collection_add", "PUT", "/api/users/carol/collection/1712.00003"),
    ("collection_add_again", "PUT", "/api/users/carol/collection/1712.00003"),
    ("collection_add_unknown", "PUT", "/api/users/carol/collection/1712.99999"),
    ("collection_after_add", "GET", "/api/users/carol/collection"),
    ("collection_remove", "DELETE", "/api/users/carol/collection/1712.00003"),
    ("collection_remove_again", "DELETE", "/api/users/carol/collection/1712.00003"),
    ("thumb_pending", "GET", "/thumbs/1712.00003.png"),
    ("thumb_failed", "GET", "/thumbs/1712.00002.png"),
    ("thumb_bad_suffix", "GET", "/thumbs/1712.00001.jpg"),
    ("no_such_route", "GET", "/api/nothing"),
];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// The golden document for one reply: status plus body, where JSON bodies
/// are embedded as values and plain bodies as strings.
pub fn golden_document(reply: &Reply) -> serde_json::Value {
    let body = match serde_json::from_slice::<serde_json::Value>(&reply.body) {
        Ok(v) => v,
        Err(_) => serde_json::Value::String(String::from_utf8_lossy(&reply.body).into_owned()),
    };
    serde_json::json!({ "status": reply.status.as_u16(), "body": body })
}

/// Compares `reply` with its golden file, rewriting the file instead when
/// `UPDATE_GOLDEN` is set.
pub fn check_golden(name: &str, reply: &Reply) -> Result<(), String> {
    // byte stability: the wire form must already be the canonical,
    // key-sorted serialization
    if let Ok(v) = serde_json::from_slice::<serde_json::Value>(&reply.body) {
        if serde_json::to_vec(&v).unwrap() != reply.body {
            return Err(format!("{name}: body is not in canonical sorted-key form"));
        }
    }
    let mut text = serde_json::to_string_pretty(&golden_document(reply)).unwrap();
    text.push('\n');
    let path = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, &text).unwrap();
        return Ok(());
    }
    let want = std::fs::read_to_string(&path)
        .map_err(|e| format!("{name}: cannot read {}: {e}", path.display()))?;
    if want != text {
        let line = want
            .lines()
            .zip(text.lines())
            .position(|(a, b)| a != b)
            .unwrap_or(0);
        return Err(format!(
            "{name}: differs from {} at line {}\n  want: {}\n  got:  {}",
            path.display(),
            line + 1,
            want.lines().nth(line).unwrap_or("<eof>"),
            text.lines().nth(line).unwrap_or("<eof>")
        ));
    }
    Ok(())
}

/// Replays every golden request against a fresh fixture store.
pub async fn replay_goldens() -> Vec<(String, Result<(), String>)> {
    let tmp = tempfile::tempdir().unwrap();
    let dir = DataDir::new(tmp.path());
    let (_, state) = fixture_state(&dir);
    let router = app(state, &dir);
    let mut out = Vec::new();
    for (name, method, uri) in GOLDEN_REQUESTS {
        let reply = call(&router, method.parse().unwrap(), uri).await;
        out.push((name.to_string(), check_golden(name, &reply)));
    }
    out
}
