//! A scripted OAI-PMH endpoint on 127.0.0.1 with one-shot fault injection.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, NaiveDate, Utc};
use portal_core::{PaperRecord, Timestamp};

/// A fault fired the first time the given page (0-based) is requested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fault {
    Unavailable {
        page: usize,
        retry_after: Option<u64>,
    },
    BadToken {
        page: usize,
    },
}

impl Fault {
    fn page(&self) -> usize {
        match self {
            Fault::Unavailable { page, .. } | Fault::BadToken { page } => *page,
        }
    }
}

struct Inner {
    records: Vec<PaperRecord>,
    page_size: usize,
    faults: Vec<Fault>,
    round: u64,
    log: Vec<String>,
}

pub struct FixtureServer {
    addr: SocketAddr,
    inner: Arc<Mutex<Inner>>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl FixtureServer {
    pub fn start(records: Vec<PaperRecord>, page_size: usize, faults: Vec<Fault>) -> FixtureServer {
        assert!(page_size > 0);
        let inner = Arc::new(Mutex::new(Inner {
            records,
            page_size,
            faults,
            round: 0,
            log: Vec::new(),
        }));
        let listener = std::net::TcpListener::bind("127.0.0.1:0").expect("bind fixture server");
        listener.set_nonblocking(true).unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let app = Router::new()
            .route("/oai2", get(handle))
            .with_state(inner.clone());
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(1)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .unwrap();
            });
        });
        FixtureServer {
            addr,
            inner,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}/oai2", self.addr)
    }

    /// Query strings received so far, in order.
    pub fn requests(&self) -> Vec<String> {
        self.inner.lock().unwrap().log.clone()
    }

    pub fn push_fault(&self, fault: Fault) {
        self.inner.lock().unwrap().faults.push(fault);
    }

    pub fn replace_records(&self, records: Vec<PaperRecord>) {
        self.inner.lock().unwrap().records = records;
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn xml(status: StatusCode, body: String) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "text/xml; charset=utf-8")],
        body,
    )
        .into_response()
}

fn oai_error(code: &str, message: &str) -> Response {
    xml(
        StatusCode::OK,
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\">\
             <responseDate>2018-01-01T00:00:00Z</responseDate><error code=\"{code}\">{message}</error></OAI-PMH>"
        ),
    )
}

async fn handle(
    State(inner): State<Arc<Mutex<Inner>>>,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    let mut s = inner.lock().unwrap();
    let mut keys: Vec<_> = q.iter().map(|(k, v)| format!("{k}={v}")).collect();
    keys.sort();
    s.log.push(keys.join("&"));
    if q.get("verb").map(String::as_str) != Some("ListRecords") {
        return oai_error("badVerb", "only ListRecords is scripted");
    }

    let (round, page, from) = match q.get("resumptionToken") {
        Some(tok) => match parse_token(tok) {
            Some((round, page, from)) if round == s.round => (round, page, from),
            _ => return oai_error("badResumptionToken", "unknown or expired token"),
        },
        None => {
            if q.get("metadataPrefix").map(String::as_str) != Some("arXiv") {
                return oai_error("cannotDisseminateFormat", "metadataPrefix must be arXiv");
            }
            let from = match q.get("from") {
                Some(f) => match NaiveDate::parse_from_str(f, "%Y-%m-%d") {
                    Ok(d) => Some(d),
                    Err(_) => return oai_error("badArgument", "bad from"),
                },
                None => None,
            };
            s.round += 1;
            (s.round, 0, from)
        }
    };

    if let Some(pos) = s.faults.iter().position(|f| f.page() == page) {
        match s.faults.remove(pos) {
            Fault::Unavailable { retry_after, .. } => {
                let mut resp = xml(StatusCode::SERVICE_UNAVAILABLE, "busy".into());
                if let Some(secs) = retry_after {
                    resp.headers_mut().insert(header::RETRY_AFTER, secs.into());
                }
                return resp;
            }
            Fault::BadToken { .. } => {
                // also invalidates outstanding tokens
                s.round += 1;
                return oai_error("badResumptionToken", "expired");
            }
        }
    }

    let selected: Vec<&PaperRecord> = s
        .records
        .iter()
        .filter(|r| from.is_none_or(|f| datestamp(r) >= f))
        .collect();
    if selected.is_empty() {
        return oai_error("noRecordsMatch", "nothing changed");
    }
    let start = page * s.page_size;
    let end = (start + s.page_size).min(selected.len());
    if start >= selected.len() {
        return oai_error("badResumptionToken", "past the end");
    }
    let mut body = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\">\
         <responseDate>2018-01-01T00:00:00Z</responseDate>\
         <request verb=\"ListRecords\" metadataPrefix=\"arXiv\">http://export.arxiv.org/oai2</request><ListRecords>\n",
    );
    for r in &selected[start..end] {
        render_record(&mut body, r);
    }
    let token = if end < selected.len() {
        format!(
            "{round}|{}|{}",
            page + 1,
            from.map(|d| d.to_string()).unwrap_or_default()
        )
    } else {
        String::new()
    };
    let _ = write!(
        body,
        "<resumptionToken cursor=\"{start}\" completeListSize=\"{}\">{}</resumptionToken></ListRecords></OAI-PMH>",
        selected.len(),
        escape(&token)
    );
    xml(StatusCode::OK, body)
}

fn parse_token(tok: &str) -> Option<(u64, usize, Option<NaiveDate>)> {
    let mut parts = tok.split('|');
    let round = parts.next()?.parse().ok()?;
    let page = parts.next()?.parse().ok()?;
    let from = match parts.next()? {
        "" => None,
        d => Some(NaiveDate::parse_from_str(d, "%Y-%m-%d").ok()?),
    };
    Some((round, page, from))
}

fn to_utc(t: Timestamp) -> DateTime<Utc> {
    DateTime::from_timestamp(t.0, 0).expect("timestamp in range")
}

fn datestamp(r: &PaperRecord) -> NaiveDate {
    to_utc(r.versions.iter().map(|v| v.submitted_at).max().unwrap()).date_naive()
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Writes `r` the way the upstream archive does: `created`/`updated` dates
/// when every version falls on midnight and there are at most two, dated
/// `<version>` elements otherwise.
pub fn render_record(out: &mut String, r: &PaperRecord) {
    let id = escape(r.arxiv_id.as_str());
    let _ = write!(
        out,
        "<record>\n <header>\n  <identifier>oai:arXiv.org:{id}</identifier>\n  <datestamp>{}</datestamp>\n  <setSpec>cs</setSpec>\n </header>\n <metadata>\n  <arXiv xmlns=\"http://arxiv.org/OAI/arXiv/\" xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\">\n   <id>{id}</id>\n",
        datestamp(r)
    );
    let midnight = r
        .versions
        .iter()
        .all(|v| v.submitted_at.0.rem_euclid(Timestamp::DAY) == 0);
    if midnight && r.versions.len() <= 2 {
        let _ = writeln!(
            out,
            "   <created>{}</created>",
            to_utc(r.versions[0].submitted_at).date_naive()
        );
        if let Some(v2) = r.versions.get(1) {
            let _ = writeln!(
                out,
                "   <updated>{}</updated>",
                to_utc(v2.submitted_at).date_naive()
            );
        }
    } else {
        let _ = writeln!(
            out,
            "   <created>{}</created>",
            to_utc(r.versions[0].submitted_at).date_naive()
        );
        for v in &r.versions {
            let _ = writeln!(
                out,
                "   <version version=\"v{}\"><date>{}</date><size>120kb</size></version>",
                v.version_number,
                to_utc(v.submitted_at).format("%a, %-d %b %Y %H:%M:%S GMT")
            );
        }
    }
    out.push_str("   <authors>");
    for a in &r.authors {
        match a.rsplit_once(' ') {
            Some((fore, key)) => {
                let _ = write!(
                    out,
                    "<author><keyname>{}</keyname><forenames>{}</forenames></author>",
                    escape(key),
                    escape(fore)
                );
            }
            None => {
                let _ = write!(out, "<author><keyname>{}</keyname></author>", escape(a));
            }
        }
    }
    let _ = write!(
        out,
        "</authors>\n   <title>{}</title>\n   <categories>{}</categories>\n   <abstract>  {}\n</abstract>\n  </arXiv>\n </metadata>\n</record>\n",
        escape(&r.title),
        escape(&r.categories.join(" ")),
        escape(&r.abstract_text)
    );
}
