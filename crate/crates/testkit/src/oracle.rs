//! Straight-line reference implementations. Each one recomputes everything
//! from the raw inputs on every call.

use std::collections::{BTreeMap, BTreeSet};

use portal_core::{
    tokenize, ArxivId, Bm25Params, CollectionEntry, Field, FieldMask, MentionEvent, PaperRecord,
    SortMode, TimeRange, Timestamp,
};

/// BM25 over a linear scan of `docs`, returning every document with a
/// nonzero match, best first (ties by identifier, descending).
///
/// Summation order is query term (sorted, deduplicated) then field in
/// declaration order, matching the production accumulator so that scores
/// agree to the last few ulps.
pub fn bm25(
    docs: &[PaperRecord],
    query: &str,
    mask: FieldMask,
    params: Bm25Params,
) -> Vec<(ArxivId, f64)> {
    let fields: Vec<Field> = Field::ALL
        .into_iter()
        .filter(|f| mask.is_all() || mask.contains(*f))
        .collect();
    let n = docs.len() as f64;
    let tokenized: Vec<[Vec<String>; 5]> = docs
        .iter()
        .map(|d| Field::ALL.map(|f| tokenize(&f.text_of(d))))
        .collect();
    let slot = |f: Field| Field::ALL.iter().position(|g| *g == f).unwrap();
    let avgdl: Vec<f64> = Field::ALL
        .iter()
        .map(|f| {
            let total: usize = tokenized.iter().map(|t| t[slot(*f)].len()).sum();
            if docs.is_empty() {
                0.0
            } else {
                total as f64 / n
            }
        })
        .collect();
    let terms: BTreeSet<String> = tokenize(query).into_iter().collect();

    let mut out = Vec::new();
    for (d, toks) in docs.iter().zip(&tokenized) {
        let mut score = 0.0;
        let mut matched = false;
        for term in &terms {
            for &f in &fields {
                let s = slot(f);
                let tf = toks[s].iter().filter(|t| *t == term).count();
                if tf == 0 {
                    continue;
                }
                matched = true;
                let df = tokenized.iter().filter(|t| t[s].contains(term)).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                let tf = tf as f64;
                let dl = toks[s].len() as f64;
                let norm = if avgdl[s] > 0.0 { dl / avgdl[s] } else { 0.0 };
                score += idf * (tf * (params.k1 + 1.0))
                    / (tf + params.k1 * (1.0 - params.b + params.b * norm));
            }
        }
        if matched {
            out.push((d.arxiv_id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| b.0.cmp(&a.0)));
    out
}

/// Raw inputs for the ranking oracle.
pub struct RankFixture<'a> {
    pub papers: &'a [PaperRecord],
    pub mentions: &'a [MentionEvent],
    pub collections: &'a [CollectionEntry],
    pub scores: &'a BTreeMap<ArxivId, f64>,
}

/// The value each mode sorts by, as a number comparable within one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKey {
    Int(i64),
    Float(f64),
}

impl RankFixture<'_> {
    /// Ranked `(id, key)` list for `candidates` under `mode`.
    pub fn rank(
        &self,
        candidates: &[ArxivId],
        mode: SortMode,
        range: Option<&TimeRange>,
    ) -> Vec<(ArxivId, OracleKey)> {
        let unique: BTreeSet<&ArxivId> = candidates.iter().collect();
        let in_range = |t: Timestamp| range.is_none_or(|r| r.start() <= t && t < r.end());
        let latest: BTreeMap<&ArxivId, Timestamp> = self
            .papers
            .iter()
            .map(|p| {
                (
                    &p.arxiv_id,
                    p.versions.iter().map(|v| v.submitted_at).max().unwrap(),
                )
            })
            .collect();
        let mentions = mention_counts(self.mentions, range);
        let collectors = collection_counts(self.collections);
        let mut rows = Vec::new();
        for id in unique {
            let date = latest[id];
            let key = match mode {
                SortMode::Date => {
                    if !in_range(date) {
                        continue;
                    }
                    OracleKey::Int(date.0)
                }
                SortMode::Twitter => {
                    let c = mentions.get(id).copied().unwrap_or(0) as i64;
                    if range.is_some() && c == 0 {
                        continue;
                    }
                    OracleKey::Int(c)
                }
                SortMode::Collection => {
                    if !in_range(date) {
                        continue;
                    }
                    OracleKey::Int(collectors.get(id).copied().unwrap_or(0) as i64)
                }
                SortMode::Relevance => {
                    if !in_range(date) {
                        continue;
                    }
                    OracleKey::Float(self.scores.get(id).copied().unwrap_or(0.0))
                }
            };
            rows.push((id.clone(), key));
        }
        // ascending by (key, id), then reversed
        rows.sort_by(|a, b| {
            let k = match (a.1, b.1) {
                (OracleKey::Int(x), OracleKey::Int(y)) => x.cmp(&y),
                (OracleKey::Float(x), OracleKey::Float(y)) => x.total_cmp(&y),
                _ => unreachable!(),
            };
            k.then_with(|| a.0.cmp(&b.0))
        });
        rows.reverse();
        rows
    }
}

/// Mention counts per paper by group-by over distinct tweet ids; the first
/// occurrence of a tweet id wins, as in the ingestion contract.
pub fn mention_counts(
    events: &[MentionEvent],
    range: Option<&TimeRange>,
) -> BTreeMap<ArxivId, u64> {
    let mut seen = BTreeSet::new();
    let mut out = BTreeMap::new();
    for e in events {
        if seen.insert(e.tweet_id.clone())
            && range.is_none_or(|r| r.start() <= e.timestamp && e.timestamp < r.end())
        {
            *out.entry(e.arxiv_id.clone()).or_insert(0) += 1;
        }
    }
    out
}

/// Distinct collectors per paper.
pub fn collection_counts(entries: &[CollectionEntry]) -> BTreeMap<ArxivId, u64> {
    let pairs: BTreeSet<(&ArxivId, &str)> = entries
        .iter()
        .map(|e| (&e.arxiv_id, e.user_id.as_str()))
        .collect();
    let mut out = BTreeMap::new();
    for (id, _) in pairs {
        *out.entry(id.clone()).or_insert(0) += 1;
    }
    out
}
