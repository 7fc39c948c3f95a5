//! Line-delimited JSON mention logs.
//!
//! ```text
//! {"tweet_id":"…","arxiv_id":"1712.00001","timestamp":"2017-12-01T10:00:00Z","url":"https://…","author_handle":"…"}
//! ```
//!
//! Blank lines are ignored. Lines that fail to parse, miss a required key,
//! carry an invalid identifier or a non-RFC 3339 timestamp are counted as
//! rejected and skipped.

use std::io::BufRead;

use portal_core::mentions::Ingested;
use portal_core::{ArxivId, IngestReport, MentionEvent, MentionStore};
use serde::Deserialize;

use crate::timefmt;

#[derive(Debug, thiserror::Error)]
#[error("mention ingestion aborted after {report:?}: {source}")]
pub struct IngestError {
    pub report: IngestReport,
    #[source]
    pub source: std::io::Error,
}

#[derive(Deserialize)]
struct Line {
    tweet_id: String,
    arxiv_id: String,
    timestamp: String,
    url: String,
    #[serde(default)]
    author_handle: Option<String>,
}

pub fn parse_line(line: &str) -> Option<MentionEvent> {
    let raw: Line = serde_json::from_str(line).ok()?;
    if raw.tweet_id.is_empty() {
        return None;
    }
    Some(MentionEvent {
        tweet_id: raw.tweet_id,
        arxiv_id: ArxivId::parse(raw.arxiv_id.trim()).ok()?,
        timestamp: timefmt::parse_rfc3339(&raw.timestamp)?,
        url: raw.url,
        author_handle: raw.author_handle.filter(|h| !h.is_empty()),
    })
}

pub fn format_line(event: &MentionEvent) -> String {
    let mut obj = serde_json::json!({
        "tweet_id": event.tweet_id,
        "arxiv_id": event.arxiv_id.as_str(),
        "timestamp": timefmt::rfc3339(event.timestamp),
        "url": event.url,
    });
    if let Some(handle) = &event.author_handle {
        obj["author_handle"] = handle.clone().into();
    }
    obj.to_string()
}

pub fn ingest_mentions(
    reader: impl BufRead,
    store: &mut MentionStore,
) -> Result<IngestReport, IngestError> {
    let mut report = IngestReport::default();
    for line in reader.lines() {
        let line = line.map_err(|source| IngestError { report, source })?;
        if line.trim().is_empty() {
            continue;
        }
        report.record(match parse_line(&line) {
            Some(event) => store.insert(event),
            None => Ingested::Rejected,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const GOOD: &str = r#"{"tweet_id":"1","arxiv_id":"1712.00001","timestamp":"2017-12-01T10:00:00Z","url":"https://twitter.com/a/status/1"}"#;

    #[test]
    fn parses_and_formats() {
        let e = parse_line(GOOD).unwrap();
        assert_eq!(e.tweet_id, "1");
        assert_eq!(parse_line(&format_line(&e)), Some(e));
    }

    #[test]
    fn malformed_lines_rejected() {
        let log = format!(
            "{GOOD}\n\n{}\n{}\n{}\nnot json\n{GOOD}\n",
            r#"{"tweet_id":"2","arxiv_id":"1712.00001","url":"u"}"#,
            r#"{"tweet_id":"3","arxiv_id":"nope","timestamp":"2017-12-01T10:00:00Z","url":"u"}"#,
            r#"{"tweet_id":"4","arxiv_id":"1712.00001","timestamp":"yesterday","url":"u"}"#,
        );
        let mut store = MentionStore::new();
        let report = ingest_mentions(Cursor::new(log), &mut store).unwrap();
        assert_eq!(
            report,
            IngestReport {
                accepted: 1,
                duplicates: 1,
                rejected: 4
            }
        );
    }

    #[test]
    fn io_failure_reports_progress() {
        struct Failing(usize);
        impl std::io::Read for Failing {
            fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
                if self.0 == 0 {
                    self.0 += 1;
                    let line = format!("{GOOD}\n");
                    buf[..line.len()].copy_from_slice(line.as_bytes());
                    Ok(line.len())
                } else {
                    Err(std::io::Error::other("disk gone"))
                }
            }
        }
        let mut store = MentionStore::new();
        let err = ingest_mentions(std::io::BufReader::new(Failing(0)), &mut store).unwrap_err();
        assert_eq!(err.report.accepted, 1);
        assert_eq!(store.len(), 1);
    }
}
