use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::id::ArxivId;
use crate::time::{TimeRange, Timestamp};

/// One social-media post referencing a paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionEvent {
    pub tweet_id: String,
    pub arxiv_id: ArxivId,
    pub timestamp: Timestamp,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_handle: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ingested {
    Accepted,
    Duplicate,
    Rejected,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: u64,
    pub duplicates: u64,
    pub rejected: u64,
}

impl IngestReport {
    pub fn record(&mut self, outcome: Ingested) {
        match outcome {
            Ingested::Accepted => self.accepted += 1,
            Ingested::Duplicate => self.duplicates += 1,
            Ingested::Rejected => self.rejected += 1,
        }
    }
}

/// Deduplicated mention log, grouped per paper and kept sorted by
/// `(timestamp, tweet_id)` so windowed counts are two binary searches.
///
/// Mentions of papers that have not been harvested yet are stored like any
/// other.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "Vec<MentionEvent>", into = "Vec<MentionEvent>")]
pub struct MentionStore {
    seen: BTreeSet<String>,
    by_paper: BTreeMap<ArxivId, Vec<MentionEvent>>,
}

impl MentionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    pub fn insert(&mut self, event: MentionEvent) -> Ingested {
        if event.tweet_id.is_empty() {
            return Ingested::Rejected;
        }
        if !self.seen.insert(event.tweet_id.clone()) {
            return Ingested::Duplicate;
        }
        let list = self.by_paper.entry(event.arxiv_id.clone()).or_default();
        let pos = list
            .partition_point(|e| (e.timestamp, &e.tweet_id) < (event.timestamp, &event.tweet_id));
        list.insert(pos, event);
        Ingested::Accepted
    }

    /// Ingests a stream where `Err` items are lines that failed to parse.
    pub fn ingest<E>(
        &mut self,
        events: impl IntoIterator<Item = Result<MentionEvent, E>>,
    ) -> IngestReport {
        let mut report = IngestReport::default();
        for event in events {
            report.record(match event {
                Ok(e) => self.insert(e),
                Err(_) => Ingested::Rejected,
            });
        }
        report
    }

    pub fn mention_count(&self, id: &ArxivId, range: Option<&TimeRange>) -> u64 {
        let Some(list) = self.by_paper.get(id) else {
            return 0;
        };
        let n = match range {
            None => list.len(),
            Some(r) => {
                let lo = list.partition_point(|e| e.timestamp < r.start());
                let hi = list.partition_point(|e| e.timestamp < r.end());
                hi - lo
            }
        };
        n as u64
    }

    /// Newest first, ties by tweet id descending.
    pub fn mentions_for(&self, id: &ArxivId, limit: usize) -> Vec<&MentionEvent> {
        self.by_paper
            .get(id)
            .map(|list| list.iter().rev().take(limit).collect())
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MentionEvent> {
        self.by_paper.values().flatten()
    }
}

impl From<Vec<MentionEvent>> for MentionStore {
    fn from(events: Vec<MentionEvent>) -> Self {
        let mut store = MentionStore::new();
        for e in events {
            store.insert(e);
        }
        store
    }
}

impl From<MentionStore> for Vec<MentionEvent> {
    fn from(store: MentionStore) -> Self {
        store.by_paper.into_values().flatten().collect()
    }
}
