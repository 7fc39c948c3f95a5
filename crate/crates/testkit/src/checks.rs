//! Production-versus-oracle comparisons shared by the test suites.

use std::collections::BTreeMap;

use portal_core::{
    search, tokenize, ArxivId, Bm25Params, CollectionEntry, CollectionStore, FieldMask,
    InvertedIndex, MentionEvent, MentionStore, PaperStore, SearchQuery, SortKey, SortMode,
    TimeRange, Timestamp,
};
use rand::Rng;

use crate::corpus::{collection_entries, mention_events, rng, Corpus, CorpusSpec};
use crate::oracle::{self, OracleKey, RankFixture};

pub fn build_index(corpus: &Corpus) -> InvertedIndex {
    let mut index = InvertedIndex::new();
    for p in &corpus.papers {
        index.index_paper(p);
    }
    index
}

/// Compares the top `k` of every query with the linear-scan scorer; returns
/// the largest absolute score difference seen.
pub fn bm25_agreement(
    corpus: &Corpus,
    index: &InvertedIndex,
    queries: &[(String, FieldMask)],
    k: usize,
) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (q, mask) in queries {
        let mut got: Vec<(ArxivId, f64)> = index
            .score_candidates(&tokenize(q), *mask)
            .into_iter()
            .map(|(id, s)| (id.clone(), s))
            .collect();
        got.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| b.0.cmp(&a.0)));
        let want = oracle::bm25(&corpus.papers, q, *mask, Bm25Params::default());
        if got.len() != want.len() {
            return Err(format!(
                "{q:?} {mask:?}: {} candidates, oracle has {}",
                got.len(),
                want.len()
            ));
        }
        for (rank, ((gi, gs), (wi, ws))) in got.iter().zip(&want).take(k).enumerate() {
            if gi != wi {
                return Err(format!(
                    "{q:?} {mask:?}: rank {rank} is {gi}, oracle says {wi}"
                ));
            }
            worst = worst.max((gs - ws).abs());
        }
    }
    Ok(worst)
}

/// Upper bounds for one randomized ranking fixture.
#[derive(Debug, Clone, Copy)]
pub struct TrialLimits {
    pub papers: usize,
    pub mentions: usize,
    pub collections: usize,
}

pub const EPOCH: i64 = 1_483_228_800; // 2017-01-01
pub const SPAN: i64 = 3 * 365 * Timestamp::DAY;

pub struct World {
    pub corpus: Corpus,
    pub index: InvertedIndex,
    pub papers: PaperStore,
    pub mentions: MentionStore,
    pub collections: CollectionStore,
    pub raw_mentions: Vec<MentionEvent>,
    pub raw_collections: Vec<CollectionEntry>,
}

impl World {
    pub fn random(seed: u64, limits: TrialLimits) -> World {
        let mut r = rng(seed);
        let n = r.gen_range(1..=limits.papers);
        let spec = CorpusSpec {
            papers: n,
            vocabulary: 60,
            abstract_words: 5..=15,
            ..CorpusSpec::default()
        };
        let corpus = Corpus::generate(&spec, seed);
        let ids: Vec<ArxivId> = corpus.papers.iter().map(|p| p.arxiv_id.clone()).collect();
        let n_events = r.gen_range(0..=limits.mentions);
        let dups = r.gen_range(0..n_events / 10 + 1);
        let raw_mentions = if n_events == 0 {
            Vec::new()
        } else {
            mention_events(&mut r, &ids, n_events, dups, EPOCH, SPAN)
        };
        let n_entries = r.gen_range(0..=limits.collections);
        let raw_collections = collection_entries(&mut r, &ids, 30, n_entries, EPOCH);
        let index = build_index(&corpus);
        let mut papers = PaperStore::new();
        for p in &corpus.papers {
            papers
                .upsert(p.clone())
                .expect("generated records are valid");
        }
        let mut mentions = MentionStore::new();
        for e in &raw_mentions {
            mentions.insert(e.clone());
        }
        let mut collections = CollectionStore::new();
        for e in &raw_collections {
            collections
                .add(&e.user_id, &e.arxiv_id, e.added_at, &papers)
                .expect("known paper");
        }
        World {
            corpus,
            index,
            papers,
            mentions,
            collections,
            raw_mentions,
            raw_collections,
        }
    }
}

/// A random range over the fixture period (sometimes `None`), occasionally
/// reaching outside it.
pub fn random_range(r: &mut impl Rng) -> Option<TimeRange> {
    if r.gen_bool(0.25) {
        return None;
    }
    let a = EPOCH
        + r.gen_range(-30..SPAN / Timestamp::DAY + 30) * Timestamp::DAY
        + r.gen_range(0..Timestamp::DAY);
    let len = r.gen_range(1..400 * Timestamp::DAY);
    Some(TimeRange::new(Timestamp(a), Timestamp(a + len)).unwrap())
}

fn key_matches(k: &SortKey, o: &OracleKey) -> bool {
    match (k, o) {
        (SortKey::Date(t), OracleKey::Int(x)) => t.0 == *x,
        (SortKey::Mentions(c), OracleKey::Int(x))
        | (SortKey::Collections(c), OracleKey::Int(x)) => *c as i64 == *x,
        (SortKey::Score(s), OracleKey::Float(x)) => s.to_bits() == x.to_bits(),
        _ => false,
    }
}

/// One randomized fixture checked in all four modes: full ordered output
/// (every page) against the brute-force ranking. Returns the number of hits
/// compared.
pub fn ranking_trial(seed: u64, limits: TrialLimits) -> Result<usize, String> {
    let w = World::random(seed, limits);
    let mut r = rng(seed ^ 0x9e37_79b9);
    let range = random_range(&mut r);
    let (q, mask) = if r.gen_bool(0.3) {
        (String::new(), FieldMask::ALL)
    } else {
        w.corpus.random_query(&mut r)
    };
    let tokens = tokenize(&q);
    let scores: BTreeMap<ArxivId, f64> = if tokens.is_empty() {
        w.papers.iter().map(|p| (p.arxiv_id.clone(), 0.0)).collect()
    } else {
        w.index
            .score_candidates(&tokens, mask)
            .into_iter()
            .map(|(id, s)| (id.clone(), s))
            .collect()
    };
    let fixture = RankFixture {
        papers: &w.corpus.papers,
        mentions: &w.raw_mentions,
        collections: &w.raw_collections,
        scores: &scores,
    };
    let candidates: Vec<ArxivId> = scores.keys().cloned().collect();
    let mut compared = 0;
    for mode in SortMode::ALL {
        let want = fixture.rank(&candidates, mode, range.as_ref());
        let mut got = Vec::new();
        for page in 1.. {
            let query = SearchQuery {
                text: q.clone(),
                fields: mask,
                sort: mode,
                time_range: range,
                page,
                per_page: 100,
            };
            let res = search(&w.index, &query, &(&w.mentions, &w.collections))
                .map_err(|e| e.to_string())?;
            if res.total != want.len() {
                return Err(format!(
                    "seed {seed} {mode:?}: total {} vs oracle {}",
                    res.total,
                    want.len()
                ));
            }
            if res.hits.is_empty() {
                break;
            }
            got.extend(res.hits);
        }
        if got.len() != want.len() {
            return Err(format!(
                "seed {seed} {mode:?}: paged {} hits, oracle {}",
                got.len(),
                want.len()
            ));
        }
        for (i, (h, (id, key))) in got.iter().zip(&want).enumerate() {
            if &h.arxiv_id != id || !key_matches(&h.sort_key, key) {
                return Err(format!(
                    "seed {seed} {mode:?} rank {i}: got {} {:?}, oracle {id} {key:?}",
                    h.arxiv_id, h.sort_key
                ));
            }
        }
        compared += want.len();
    }
    Ok(compared)
}
