use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::collections::CollectionStore;
use crate::id::ArxivId;
use crate::index::{Candidate, FieldMask, InvertedIndex};
use crate::mentions::MentionStore;
use crate::ranking::{ranking_order, RankError, RankedHit, SortKey, SortMode};
use crate::time::TimeRange;
use crate::tokenize::tokenize;

pub const MAX_PER_PAGE: u32 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchQuery {
    pub text: String,
    pub fields: FieldMask,
    pub sort: SortMode,
    pub time_range: Option<TimeRange>,
    pub page: u32,
    pub per_page: u32,
}

impl Default for SearchQuery {
    fn default() -> Self {
        SearchQuery {
            text: String::new(),
            fields: FieldMask::ALL,
            sort: SortMode::Date,
            time_range: None,
            page: 1,
            per_page: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    InvalidQuery(&'static str),
    Rank(RankError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::InvalidQuery(why) => write!(f, "invalid query: {why}"),
            SearchError::Rank(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for SearchError {}

impl From<RankError> for SearchError {
    fn from(e: RankError) -> Self {
        SearchError::Rank(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResults {
    pub hits: Vec<RankedHit>,
    pub total: usize,
}

/// Mention and collection counts consulted by the Twitter and Collection
/// modes.
pub trait MentionsAndCollections {
    fn mention_count(&self, id: &ArxivId, range: Option<&TimeRange>) -> u64;
    fn collection_count(&self, id: &ArxivId) -> u64;
}

impl MentionsAndCollections for (&MentionStore, &CollectionStore) {
    fn mention_count(&self, id: &ArxivId, range: Option<&TimeRange>) -> u64 {
        self.0.mention_count(id, range)
    }

    fn collection_count(&self, id: &ArxivId) -> u64 {
        self.1.collection_count(id)
    }
}

/// Candidate selection, ranking and pagination for one query.
///
/// Candidates are the documents matching at least one query token in at
/// least one masked field; an empty query selects the whole corpus with
/// relevance 0.
pub fn search<X: MentionsAndCollections + ?Sized>(
    index: &InvertedIndex,
    query: &SearchQuery,
    external: &X,
) -> Result<SearchResults, SearchError> {
    if query.page == 0 {
        return Err(SearchError::InvalidQuery("page must be at least 1"));
    }
    if query.per_page == 0 || query.per_page > MAX_PER_PAGE {
        return Err(SearchError::InvalidQuery("per_page must be within 1..=100"));
    }
    let range = query.time_range.as_ref();
    let candidates = index.candidates(&tokenize(&query.text), query.fields);
    let mut keyed: Vec<(SortKey, &Candidate<'_>)> = Vec::with_capacity(candidates.len());
    for c in &candidates {
        if query.sort != SortMode::Twitter && range.is_some_and(|r| !r.contains(c.latest_date)) {
            continue;
        }
        let key = match query.sort {
            SortMode::Date => SortKey::Date(c.latest_date),
            SortMode::Twitter => {
                let count = external.mention_count(c.id, range);
                if range.is_some() && count == 0 {
                    continue;
                }
                SortKey::Mentions(count)
            }
            SortMode::Collection => SortKey::Collections(external.collection_count(c.id)),
            SortMode::Relevance => SortKey::Score(c.score),
        };
        keyed.push((key, c));
    }
    let total = keyed.len();
    let start = ((query.page as usize - 1).saturating_mul(query.per_page as usize)).min(total);
    let end = start.saturating_add(query.per_page as usize).min(total);
    let order = |a: &(SortKey, &Candidate<'_>), b: &(SortKey, &Candidate<'_>)| {
        ranking_order((&a.0, a.1.id), (&b.0, b.1.id))
    };
    if end == 0 {
        keyed.clear();
    } else if end < total {
        keyed.select_nth_unstable_by(end - 1, order);
        keyed.truncate(end);
    }
    keyed.sort_unstable_by(order);
    let hits = keyed[start..]
        .iter()
        .map(|(key, c)| RankedHit {
            arxiv_id: c.id.clone(),
            relevance_score: c.score,
            sort_key: *key,
        })
        .collect();
    Ok(SearchResults { hits, total })
}
