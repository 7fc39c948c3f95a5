//! The four sort modes and the time-span restriction.
//!
//! | mode       | key                           | range filters on          |
//! |------------|-------------------------------|---------------------------|
//! | Date       | latest version date           | latest date               |
//! | Twitter    | mentions inside the range     | mention timestamps; zero-count papers dropped |
//! | Collection | all-time collection count     | latest date               |
//! | Relevance  | BM25 score                    | latest date               |
//!
//! Keys sort descending; equal keys fall back to identifier descending.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::id::ArxivId;
use crate::time::{TimeRange, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortMode {
    #[default]
    Date,
    Twitter,
    Collection,
    Relevance,
}

impl SortMode {
    pub const ALL: [SortMode; 4] = [
        SortMode::Date,
        SortMode::Twitter,
        SortMode::Collection,
        SortMode::Relevance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SortMode::Date => "date",
            SortMode::Twitter => "twitter",
            SortMode::Collection => "collection",
            SortMode::Relevance => "relevance",
        }
    }

    pub fn from_name(name: &str) -> Option<SortMode> {
        SortMode::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// The value a hit was ordered by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    Date(Timestamp),
    Mentions(u64),
    Collections(u64),
    Score(f64),
}

impl SortKey {
    fn cmp_same_mode(&self, other: &SortKey) -> Ordering {
        match (self, other) {
            (SortKey::Date(a), SortKey::Date(b)) => a.cmp(b),
            (SortKey::Mentions(a), SortKey::Mentions(b))
            | (SortKey::Collections(a), SortKey::Collections(b)) => a.cmp(b),
            (SortKey::Score(a), SortKey::Score(b)) => a.total_cmp(b),
            _ => unreachable!("keys of one ranking share a mode"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub arxiv_id: ArxivId,
    pub relevance_score: f64,
    pub sort_key: SortKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    LatestDate,
    MentionCount,
    CollectionCount,
    Relevance,
}

impl Signal {
    pub fn name(self) -> &'static str {
        match self {
            Signal::LatestDate => "latest_date",
            Signal::MentionCount => "mention_count",
            Signal::CollectionCount => "collection_count",
            Signal::Relevance => "relevance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankError {
    MissingSignal(ArxivId, Signal),
}

impl fmt::Display for RankError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankError::MissingSignal(id, s) => write!(f, "no {} signal for {id}", s.name()),
        }
    }
}

impl core::error::Error for RankError {}

/// Per-paper inputs to ranking. `None` means the signal is unknown for the
/// paper, which is an error when the active mode needs it.
pub trait Signals {
    fn latest_date(&self, id: &ArxivId) -> Option<Timestamp>;
    fn mention_count(&self, id: &ArxivId, range: Option<&TimeRange>) -> Option<u64>;
    fn collection_count(&self, id: &ArxivId) -> Option<u64>;
    fn relevance(&self, id: &ArxivId) -> Option<f64>;
}

fn require<T>(value: Option<T>, id: &ArxivId, signal: Signal) -> Result<T, RankError> {
    value.ok_or_else(|| RankError::MissingSignal(id.clone(), signal))
}

/// Keeps the candidates whose latest date lies in `range`.
pub fn filter_by_date<'a, S: Signals + ?Sized>(
    candidates: impl IntoIterator<Item = &'a ArxivId>,
    range: &TimeRange,
    signals: &S,
) -> Result<Vec<&'a ArxivId>, RankError> {
    let mut kept = Vec::new();
    for id in candidates {
        if range.contains(require(signals.latest_date(id), id, Signal::LatestDate)?) {
            kept.push(id);
        }
    }
    Ok(kept)
}

/// Key descending, then identifier descending.
pub(crate) fn ranking_order(a: (&SortKey, &ArxivId), b: (&SortKey, &ArxivId)) -> Ordering {
    b.0.cmp_same_mode(a.0).then_with(|| b.1.cmp(a.1))
}

/// Orders `candidates` under `mode`. Duplicate identifiers collapse to one
/// hit.
pub fn rank<'a, S: Signals + ?Sized>(
    candidates: impl IntoIterator<Item = &'a ArxivId>,
    mode: SortMode,
    range: Option<&TimeRange>,
    signals: &S,
) -> Result<Vec<RankedHit>, RankError> {
    let mut hits = Vec::new();
    for id in candidates {
        let relevance_score = require(signals.relevance(id), id, Signal::Relevance)?;
        let date_filtered = mode != SortMode::Twitter;
        if let (true, Some(range)) = (date_filtered, range) {
            let date = require(signals.latest_date(id), id, Signal::LatestDate)?;
            if !range.contains(date) {
                continue;
            }
        }
        let sort_key = match mode {
            SortMode::Date => {
                SortKey::Date(require(signals.latest_date(id), id, Signal::LatestDate)?)
            }
            SortMode::Twitter => {
                let count = require(signals.mention_count(id, range), id, Signal::MentionCount)?;
                if range.is_some() && count == 0 {
                    continue;
                }
                SortKey::Mentions(count)
            }
            SortMode::Collection => SortKey::Collections(require(
                signals.collection_count(id),
                id,
                Signal::CollectionCount,
            )?),
            SortMode::Relevance => SortKey::Score(relevance_score),
        };
        hits.push(RankedHit {
            arxiv_id: id.clone(),
            relevance_score,
            sort_key,
        });
    }
    hits.sort_unstable_by(|a, b| {
        ranking_order((&a.sort_key, &a.arxiv_id), (&b.sort_key, &b.arxiv_id))
    });
    hits.dedup_by(|a, b| a.arxiv_id == b.arxiv_id);
    Ok(hits)
}
