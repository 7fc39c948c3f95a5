//! Incremental OAI-PMH harvesting, one protocol page per call.

use std::path::Path;
use std::time::Duration;

use chrono::NaiveDate;
use portal_core::{PaperRecord, UpsertOutcome};
use serde::{Deserialize, Serialize};

use crate::oai::{self, Envelope, OaiError};
use crate::persist::{self, PersistError};
use crate::state::PortalState;

/// Harvest progress, persisted between runs as a small JSON document.
///
/// `resumption_token` is present iff a round is mid-flight; `round_started`
/// remembers the date the in-flight round began so that completing it in a
/// later process still advances `last_completed_datestamp` correctly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestCursor {
    pub last_completed_datestamp: NaiveDate,
    pub resumption_token: Option<String>,
    pub records_ingested: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_started: Option<NaiveDate>,
}

impl HarvestCursor {
    pub fn starting_from(from: NaiveDate) -> Self {
        HarvestCursor {
            last_completed_datestamp: from,
            resumption_token: None,
            records_ingested: 0,
            round_started: None,
        }
    }

    pub fn in_flight(&self) -> bool {
        self.resumption_token.is_some()
    }

    /// Drops an expired token; the next call re-requests the round from
    /// `last_completed_datestamp`.
    pub fn restart(&mut self) {
        self.resumption_token = None;
        self.round_started = None;
    }

    pub fn load(path: &Path) -> Result<Option<Self>, CursorFileError> {
        match std::fs::read(path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("cursor serializes");
        bytes.push(b'\n');
        persist::write_atomic(path, &bytes)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CursorFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cursor file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarvestError {
    /// HTTP 503; retry with the same cursor after the given delay.
    #[error("endpoint unavailable, retry after {0} s")]
    TransientUnavailable(u64),
    /// The server no longer accepts the resumption token; call
    /// [`HarvestCursor::restart`] and harvest the round again.
    #[error("resumption token expired")]
    TokenExpired,
    #[error("protocol error: {0}")]
    ProtocolError(String),
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
}

/// Records that could not be turned into a [`PaperRecord`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRecord {
    pub identifier: Option<String>,
    pub error: OaiError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestPage {
    pub records: Vec<PaperRecord>,
    pub rejected: Vec<RejectedRecord>,
    /// Records marked deleted upstream; withdrawals are not applied.
    pub skipped_deleted: usize,
    pub cursor: HarvestCursor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub retry_after: Option<String>,
    pub body: String,
}

/// The one HTTP operation the harvester needs.
pub trait Transport {
    fn get(&self, url: &str) -> Result<HttpReply, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        UreqTransport {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpReply, String> {
        let response = match self.agent.get(url).call() {
            Ok(r) => r,
            Err(ureq::Error::Status(_, r)) => r,
            Err(e) => return Err(e.to_string()),
        };
        let status = response.status();
        let retry_after = response.header("Retry-After").map(str::to_owned);
        let body = response.into_string().map_err(|e| e.to_string())?;
        Ok(HttpReply {
            status,
            retry_after,
            body,
        })
    }
}

const DEFAULT_RETRY_AFTER: u64 = 10;

fn request_url(endpoint: &str, cursor: &HarvestCursor) -> String {
    let sep = if endpoint.contains('?') { '&' } else { '?' };
    match &cursor.resumption_token {
        Some(token) => {
            let encoded: String = url_encode(token);
            format!("{endpoint}{sep}verb=ListRecords&resumptionToken={encoded}")
        }
        None => format!(
            "{endpoint}{sep}verb=ListRecords&metadataPrefix=arXiv&from={}",
            cursor.last_completed_datestamp.format("%Y-%m-%d")
        ),
    }
}

fn url_encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// Fetches one ListRecords page.
///
/// A new round starts when the cursor carries no token; `today` becomes the
/// round's start date and, once the last page arrives, the new
/// `last_completed_datestamp`. On error the cursor is untouched and the call
/// can be repeated with it.
pub fn harvest_batch(
    transport: &dyn Transport,
    endpoint: &str,
    cursor: &HarvestCursor,
    today: NaiveDate,
) -> Result<HarvestPage, HarvestError> {
    let reply = transport
        .get(&request_url(endpoint, cursor))
        .map_err(HarvestError::Unreachable)?;
    match reply.status {
        200 => {}
        503 => {
            let secs = reply
                .retry_after
                .as_deref()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(DEFAULT_RETRY_AFTER);
            return Err(HarvestError::TransientUnavailable(secs));
        }
        other => return Err(HarvestError::ProtocolError(format!("HTTP status {other}"))),
    }

    let round_started = cursor.round_started.unwrap_or(today);
    let page = match oai::parse_list_records(&reply.body).map_err(HarvestError::ProtocolError)? {
        Envelope::Error { code, .. } if code == "noRecordsMatch" => oai::ListRecordsPage {
            records: Vec::new(),
            resumption_token: None,
        },
        Envelope::Error { code, .. } if code == "badResumptionToken" => {
            return Err(HarvestError::TokenExpired)
        }
        Envelope::Error { code, message } => {
            return Err(HarvestError::ProtocolError(format!("{code}: {message}")))
        }
        Envelope::Page(page) => page,
    };

    let mut records = Vec::with_capacity(page.records.len());
    let mut rejected = Vec::new();
    let mut skipped_deleted = 0;
    for el in &page.records {
        match oai::record_from_element(el) {
            Ok(r) => records.push(r),
            Err(OaiError::Deleted) => skipped_deleted += 1,
            Err(error) => {
                let identifier = el
                    .child("header")
                    .and_then(|h| h.child_text("identifier"))
                    .map(str::to_owned);
                rejected.push(RejectedRecord { identifier, error });
            }
        }
    }

    let mut next = cursor.clone();
    next.records_ingested += records.len() as u64;
    match page.resumption_token {
        Some(token) => {
            next.resumption_token = Some(token);
            next.round_started = Some(round_started);
        }
        None => {
            next.resumption_token = None;
            next.round_started = None;
            next.last_completed_datestamp = next.last_completed_datestamp.max(round_started);
        }
    }
    Ok(HarvestPage {
        records,
        rejected,
        skipped_deleted,
        cursor: next,
    })
}

/// Retry and paging policy for [`run_harvest`].
#[derive(Debug, Clone)]
pub struct HarvestOptions {
    pub max_pages: Option<usize>,
    /// Consecutive 503 answers tolerated for one page.
    pub max_retries: u32,
    /// Round restarts tolerated after expired tokens.
    pub max_restarts: u32,
    /// Upper bound on a single Retry-After wait.
    pub max_wait: Duration,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        HarvestOptions {
            max_pages: None,
            max_retries: 5,
            max_restarts: 3,
            max_wait: Duration::from_secs(600),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarvestSummary {
    pub pages: usize,
    pub inserted: usize,
    pub merged: usize,
    pub unchanged: usize,
    pub rejected: usize,
    pub retries: u32,
    pub restarts: u32,
    pub completed: bool,
}

/// Pages through one harvest round, upserting every record into `state`.
///
/// `cursor` is advanced after each page has been applied, so on error it
/// names the page to fetch next and the caller can persist it as is.
pub fn run_harvest(
    state: &mut PortalState,
    cursor: &mut HarvestCursor,
    transport: &dyn Transport,
    endpoint: &str,
    today: NaiveDate,
    options: &HarvestOptions,
    sleep: &dyn Fn(Duration),
) -> Result<HarvestSummary, HarvestError> {
    let mut summary = HarvestSummary::default();
    let mut retries_left = options.max_retries;
    loop {
        if options.max_pages.is_some_and(|max| summary.pages >= max) {
            return Ok(summary);
        }
        let page = match harvest_batch(transport, endpoint, cursor, today) {
            Ok(page) => page,
            Err(HarvestError::TransientUnavailable(secs)) if retries_left > 0 => {
                retries_left -= 1;
                summary.retries += 1;
                tracing::info!(secs, "endpoint busy, waiting");
                sleep(Duration::from_secs(secs).min(options.max_wait));
                continue;
            }
            Err(HarvestError::TokenExpired) if summary.restarts < options.max_restarts => {
                summary.restarts += 1;
                tracing::warn!("resumption token expired, restarting round");
                cursor.restart();
                continue;
            }
            Err(e) => return Err(e),
        };
        retries_left = options.max_retries;
        summary.pages += 1;
        summary.rejected += page.rejected.len();
        for r in &page.rejected {
            tracing::warn!(identifier = ?r.identifier, error = %r.error, "skipping record");
        }
        for record in page.records {
            match state.upsert_paper(record) {
                Ok(UpsertOutcome::Inserted) => summary.inserted += 1,
                Ok(UpsertOutcome::VersionsMerged) => summary.merged += 1,
                Ok(UpsertOutcome::Unchanged) => summary.unchanged += 1,
                Err(e) => {
                    tracing::warn!(error = %e, "record failed validation");
                    summary.rejected += 1;
                }
            }
        }
        *cursor = page.cursor;
        if !cursor.in_flight() {
            summary.completed = true;
            return Ok(summary);
        }
    }
}
