//! Inverted index over the five metadata fields with BM25 scoring.
//!
//! Every field keeps its own postings, document frequencies and average
//! length. A multi-field score is the sum of the per-field BM25 scores of
//! the fields in the mask:
//!
//! ```text
//! score(D, Q) = Σ_field Σ_t IDF(t) · tf·(k1 + 1) / (tf + k1·(1 − b + b·dl/avgdl))
//! IDF(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))
//! ```
//!
//! Query tokens are deduplicated before scoring. Terms are visited in
//! ascending order and fields in [`Field::ALL`] order, so two scorers that
//! follow the same order produce bit-identical sums.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::id::ArxivId;
use crate::record::PaperRecord;
use crate::time::Timestamp;
use crate::tokenize::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Abstract,
    Authors,
    Categories,
    ArxivId,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::Title,
        Field::Abstract,
        Field::Authors,
        Field::Categories,
        Field::ArxivId,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Authors => "authors",
            Field::Categories => "categories",
            Field::ArxivId => "arxiv_id",
        }
    }

    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == name)
    }

    fn slot(self) -> usize {
        self as usize
    }

    /// The field's text as it is fed to the tokenizer.
    pub fn text_of(self, record: &PaperRecord) -> String {
        match self {
            Field::Title => record.title.clone(),
            Field::Abstract => record.abstract_text.clone(),
            Field::Authors => record.authors.join(" "),
            Field::Categories => record.categories.join(" "),
            Field::ArxivId => String::from(record.arxiv_id.as_str()),
        }
    }
}

/// Subset of fields a query is restricted to. The empty mask means all
/// fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FieldMask(u8);

impl FieldMask {
    pub const ALL: FieldMask = FieldMask(0);

    pub fn from_fields(fields: impl IntoIterator<Item = Field>) -> Self {
        fields.into_iter().fold(FieldMask(0), |m, f| m.with(f))
    }

    pub fn with(self, field: Field) -> Self {
        FieldMask(self.0 | (1 << field.slot()))
    }

    pub fn is_all(self) -> bool {
        self.0 == 0 || self.0 == 0b1_1111
    }

    pub fn contains(self, field: Field) -> bool {
        self.0 == 0 || self.0 & (1 << field.slot()) != 0
    }

    /// Fields searched under this mask, in canonical order.
    pub fn fields(self) -> impl Iterator<Item = Field> {
        Field::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexError {
    UnknownDocument(ArxivId),
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::UnknownDocument(id) => write!(f, "document {id} is not indexed"),
        }
    }
}

impl core::error::Error for IndexError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    tf: u32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct FieldPostings {
    terms: BTreeMap<String, Vec<Posting>>,
    total_len: u64,
}

impl FieldPostings {
    fn tf(&self, term: &str, doc: u32) -> u32 {
        self.terms
            .get(term)
            .and_then(|list| {
                list.binary_search_by_key(&doc, |p| p.doc)
                    .ok()
                    .map(|i| list[i].tf)
            })
            .unwrap_or(0)
    }

    fn df(&self, term: &str) -> usize {
        self.terms.get(term).map_or(0, Vec::len)
    }

    fn insert(&mut self, term: &str, doc: u32, tf: u32) {
        let list = match self.terms.get_mut(term) {
            Some(list) => list,
            None => self.terms.entry(String::from(term)).or_default(),
        };
        match list.binary_search_by_key(&doc, |p| p.doc) {
            Ok(i) => list[i].tf = tf,
            Err(i) => list.insert(i, Posting { doc, tf }),
        }
    }

    fn remove(&mut self, term: &str, doc: u32) {
        if let Some(list) = self.terms.get_mut(term) {
            if let Ok(i) = list.binary_search_by_key(&doc, |p| p.doc) {
                list.remove(i);
            }
            if list.is_empty() {
                self.terms.remove(term);
            }
        }
    }
}

/// Per-document bookkeeping: the distinct terms of each field, so a
/// replacement can retract exactly the postings it added.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DocEntry {
    id: ArxivId,
    latest_date: Timestamp,
    lengths: [u32; 5],
    terms: [Vec<(String, u32)>; 5],
}

/// Corpus statistics used by BM25.
#[derive(Debug, Clone, Copy)]
pub struct IndexStats<'a> {
    index: &'a InvertedIndex,
}

impl IndexStats<'_> {
    pub fn doc_count(&self) -> usize {
        self.index.live
    }

    pub fn df(&self, field: Field, term: &str) -> usize {
        self.index.fields[field.slot()].df(term)
    }

    /// Average token count of `field`; 0 for an empty corpus.
    pub fn avgdl(&self, field: Field) -> f64 {
        if self.index.live == 0 {
            return 0.0;
        }
        self.index.fields[field.slot()].total_len as f64 / self.index.live as f64
    }
}

/// A document selected by a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<'a> {
    pub id: &'a ArxivId,
    pub score: f64,
    pub latest_date: Timestamp,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InvertedIndex {
    params: Bm25Params,
    fields: [FieldPostings; 5],
    docs: Vec<Option<DocEntry>>,
    ords: BTreeMap<ArxivId, u32>,
    live: usize,
}

impl InvertedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_params(params: Bm25Params) -> Self {
        InvertedIndex {
            params,
            ..Self::default()
        }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn stats(&self) -> IndexStats<'_> {
        IndexStats { index: self }
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn contains(&self, id: &ArxivId) -> bool {
        self.ords.contains_key(id)
    }

    pub fn latest_date(&self, id: &ArxivId) -> Option<Timestamp> {
        self.entry(id).map(|e| e.latest_date)
    }

    /// Identifiers of every indexed document, in ascending id order.
    pub fn ids(&self) -> impl Iterator<Item = &ArxivId> {
        self.ords.keys()
    }

    fn entry(&self, id: &ArxivId) -> Option<&DocEntry> {
        let ord = *self.ords.get(id)?;
        self.docs[ord as usize].as_ref()
    }

    /// Adds `record`, replacing any previously indexed version of it.
    pub fn index_paper(&mut self, record: &PaperRecord) {
        let ord = match self.ords.get(&record.arxiv_id) {
            Some(&ord) => {
                self.retract(ord);
                ord
            }
            None => {
                let ord = u32::try_from(self.docs.len()).expect("fewer than 2^32 documents");
                self.docs.push(None);
                self.ords.insert(record.arxiv_id.clone(), ord);
                ord
            }
        };

        let mut lengths = [0u32; 5];
        let mut terms: [Vec<(String, u32)>; 5] = Default::default();
        for field in Field::ALL {
            let tokens = tokenize(&field.text_of(record));
            lengths[field.slot()] = tokens.len() as u32;
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens {
                *counts.entry(t).or_insert(0) += 1;
            }
            let postings = &mut self.fields[field.slot()];
            postings.total_len += u64::from(lengths[field.slot()]);
            for (term, tf) in &counts {
                postings.insert(term, ord, *tf);
            }
            terms[field.slot()] = counts.into_iter().collect();
        }
        self.docs[ord as usize] = Some(DocEntry {
            id: record.arxiv_id.clone(),
            latest_date: record.latest_date(),
            lengths,
            terms,
        });
        self.live += 1;
    }

    fn retract(&mut self, ord: u32) {
        let Some(entry) = self.docs[ord as usize].take() else {
            return;
        };
        for field in Field::ALL {
            let postings = &mut self.fields[field.slot()];
            postings.total_len -= u64::from(entry.lengths[field.slot()]);
            for (term, _) in &entry.terms[field.slot()] {
                postings.remove(term, ord);
            }
        }
        self.live -= 1;
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.live as f64;
        let df = df as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    fn term_weight(&self, idf: f64, tf: u32, dl: u32, avgdl: f64) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let norm = if avgdl > 0.0 {
            f64::from(dl) / avgdl
        } else {
            0.0
        };
        idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm))
    }

    /// BM25 score of one document for `query_tokens` under `mask`.
    pub fn bm25_score(
        &self,
        query_tokens: &[String],
        id: &ArxivId,
        mask: FieldMask,
    ) -> Result<f64, IndexError> {
        let ord = *self
            .ords
            .get(id)
            .ok_or_else(|| IndexError::UnknownDocument(id.clone()))?;
        let entry = self.docs[ord as usize]
            .as_ref()
            .ok_or_else(|| IndexError::UnknownDocument(id.clone()))?;
        let stats = self.stats();
        let mut score = 0.0;
        for term in unique_sorted(query_tokens) {
            for field in mask.fields() {
                let postings = &self.fields[field.slot()];
                let tf = postings.tf(term, ord);
                if tf == 0 {
                    continue;
                }
                let idf = self.idf(postings.df(term));
                score += self.term_weight(idf, tf, entry.lengths[field.slot()], stats.avgdl(field));
            }
        }
        Ok(score)
    }

    /// Every document matching at least one token in at least one masked
    /// field, with its BM25 score.
    pub fn score_candidates(
        &self,
        query_tokens: &[String],
        mask: FieldMask,
    ) -> Vec<(&ArxivId, f64)> {
        self.matching(query_tokens, mask)
            .into_iter()
            .map(|c| (c.id, c.score))
            .collect()
    }

    /// Every live document with score 0, for browse mode.
    pub fn all_documents(&self) -> Vec<(&ArxivId, f64)> {
        self.candidates(&[], FieldMask::ALL)
            .into_iter()
            .map(|c| (c.id, c.score))
            .collect()
    }

    /// Documents matching any query token in a masked field, with their
    /// scores and latest dates; no tokens selects every document at score 0.
    pub fn candidates(&self, query_tokens: &[String], mask: FieldMask) -> Vec<Candidate<'_>> {
        if query_tokens.is_empty() {
            return self
                .docs
                .iter()
                .flatten()
                .map(|e| Candidate {
                    id: &e.id,
                    score: 0.0,
                    latest_date: e.latest_date,
                })
                .collect();
        }
        self.matching(query_tokens, mask)
    }

    fn matching(&self, query_tokens: &[String], mask: FieldMask) -> Vec<Candidate<'_>> {
        let mut acc: Vec<f64> = Vec::new();
        let mut hit: Vec<bool> = Vec::new();
        let mut touched: Vec<u32> = Vec::new();
        let stats = self.stats();
        for term in unique_sorted(query_tokens) {
            for field in mask.fields() {
                let postings = &self.fields[field.slot()];
                let Some(list) = postings.terms.get(term) else {
                    continue;
                };
                if acc.is_empty() {
                    acc = alloc::vec![0.0; self.docs.len()];
                    hit = alloc::vec![false; self.docs.len()];
                }
                let idf = self.idf(list.len());
                let avgdl = stats.avgdl(field);
                for p in list {
                    let entry = self.docs[p.doc as usize]
                        .as_ref()
                        .expect("postings reference live docs");
                    let slot = p.doc as usize;
                    if !hit[slot] {
                        hit[slot] = true;
                        touched.push(p.doc);
                    }
                    acc[slot] += self.term_weight(idf, p.tf, entry.lengths[field.slot()], avgdl);
                }
            }
        }
        touched
            .into_iter()
            .map(|ord| {
                let entry = self.docs[ord as usize].as_ref().expect("live doc");
                Candidate {
                    id: &entry.id,
                    score: acc[ord as usize],
                    latest_date: entry.latest_date,
                }
            })
            .collect()
    }
}

fn unique_sorted(tokens: &[String]) -> Vec<&str> {
    let mut v: Vec<&str> = tokens.iter().map(String::as_str).collect();
    v.sort_unstable();
    v.dedup();
    v
}
