use std::collections::{BTreeMap, BTreeSet};

use portal_core::{
    AddOutcome, ArxivId, CollectionStore, IngestReport, MentionEvent, MentionStore, PaperStore,
    RemoveOutcome, TimeRange, Timestamp,
};
use portal_testkit::corpus::{collection_entries, mention_events, rng, Corpus, CorpusSpec};
use portal_testkit::oracle;
use proptest::prelude::*;

const START: i64 = 1_512_086_400; // 2017-12-01
const SPAN: i64 = 60 * Timestamp::DAY;

fn ids(n: usize, seed: u64) -> (Vec<ArxivId>, PaperStore) {
    let corpus = Corpus::generate(
        &CorpusSpec {
            papers: n,
            vocabulary: 20,
            abstract_words: 1..=3,
            ..CorpusSpec::default()
        },
        seed,
    );
    let mut store = PaperStore::new();
    for p in &corpus.papers {
        store.upsert(p.clone()).unwrap();
    }
    (
        corpus.papers.into_iter().map(|p| p.arxiv_id).collect(),
        store,
    )
}

fn ingest(store: &mut MentionStore, events: &[MentionEvent]) -> IngestReport {
    store.ingest(events.iter().cloned().map(Ok::<_, ()>))
}

#[test]
fn thousand_events_with_hundred_duplicates() {
    let (papers, _) = ids(50, 1);
    let events = mention_events(&mut rng(2), &papers, 1000, 100, START, SPAN);
    let distinct: BTreeSet<&str> = events.iter().map(|e| e.tweet_id.as_str()).collect();
    assert_eq!(distinct.len(), 900);

    let mut store = MentionStore::new();
    let report = ingest(&mut store, &events);
    assert_eq!(
        (report.accepted, report.duplicates, report.rejected),
        (900, 100, 0)
    );

    let again = ingest(&mut store, &events);
    assert_eq!((again.accepted, again.duplicates), (0, 1000));
    assert_eq!(store.len(), 900);

    let range = TimeRange::new(
        Timestamp(START + 10 * Timestamp::DAY),
        Timestamp(START + 20 * Timestamp::DAY),
    )
    .unwrap();
    for r in [None, Some(&range)] {
        let want = oracle::mention_counts(&events, r);
        for id in &papers {
            assert_eq!(
                store.mention_count(id, r),
                want.get(id).copied().unwrap_or(0),
                "{id}"
            );
        }
    }
}

#[test]
fn empty_stream_reports_nothing() {
    let mut store = MentionStore::new();
    assert_eq!(ingest(&mut store, &[]), IngestReport::default());
}

#[test]
fn mention_store_survives_serialization() {
    let (papers, _) = ids(10, 3);
    let events = mention_events(&mut rng(4), &papers, 200, 20, START, SPAN);
    let mut store = MentionStore::new();
    ingest(&mut store, &events);
    let back: MentionStore = serde_json::from_slice(&serde_json::to_vec(&store).unwrap()).unwrap();
    for id in &papers {
        assert_eq!(back.mention_count(id, None), store.mention_count(id, None));
        assert_eq!(back.mentions_for(id, 5), store.mentions_for(id, 5));
    }
}

#[test]
fn five_hundred_collection_entries_match_group_by() {
    let (papers, store) = ids(80, 5);
    let entries = collection_entries(&mut rng(6), &papers, 40, 500, START);
    let mut c = CollectionStore::new();
    let mut added = 0;
    for e in &entries {
        if c.add(&e.user_id, &e.arxiv_id, e.added_at, &store).unwrap() == AddOutcome::Added {
            added += 1;
        }
    }
    let want = oracle::collection_counts(&entries);
    assert_eq!(added, want.values().sum::<u64>());
    for id in &papers {
        assert_eq!(c.collection_count(id), want.get(id).copied().unwrap_or(0));
    }
    // re-adding everything is a no-op
    for e in &entries {
        assert_eq!(
            c.add(&e.user_id, &e.arxiv_id, Timestamp(0), &store)
                .unwrap(),
            AddOutcome::AlreadyPresent
        );
    }
    for id in &papers {
        assert_eq!(c.collection_count(id), want.get(id).copied().unwrap_or(0));
    }
}

#[derive(Debug, Clone)]
enum Op {
    Add(usize, usize),
    Remove(usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..6, 0usize..8).prop_map(|(u, p)| Op::Add(u, p)),
        (0usize..6, 0usize..8).prop_map(|(u, p)| Op::Remove(u, p))
    ]
}

proptest! {
    #[test]
    fn window_counts_are_additive(seed in any::<u64>(), a in 0i64..60, b in 0i64..60, c in 0i64..60) {
        let (papers, _) = ids(8, seed);
        let events = mention_events(&mut rng(seed), &papers, 300, 30, START, SPAN);
        let mut store = MentionStore::new();
        ingest(&mut store, &events);
        let mut cut = [a, b, c];
        cut.sort();
        let t = |d: i64| Timestamp(START + d * Timestamp::DAY);
        prop_assume!(cut[0] < cut[1] && cut[1] < cut[2]);
        let left = TimeRange::new(t(cut[0]), t(cut[1])).unwrap();
        let right = TimeRange::new(t(cut[1]), t(cut[2])).unwrap();
        let whole = TimeRange::new(t(cut[0]), t(cut[2])).unwrap();
        for id in &papers {
            prop_assert_eq!(
                store.mention_count(id, Some(&left)) + store.mention_count(id, Some(&right)),
                store.mention_count(id, Some(&whole))
            );
            prop_assert!(store.mention_count(id, Some(&whole)) <= store.mention_count(id, None));
        }
    }

    #[test]
    fn ingestion_order_does_not_change_counts(seed in any::<u64>()) {
        let (papers, _) = ids(6, seed);
        // distinct tweet ids only, so arrival order cannot pick a different winner
        let events = mention_events(&mut rng(seed), &papers, 150, 0, START, SPAN);
        let mut fwd = MentionStore::new();
        ingest(&mut fwd, &events);
        let mut rev_events = events.clone();
        rev_events.reverse();
        let mut rev = MentionStore::new();
        ingest(&mut rev, &rev_events);
        for id in &papers {
            prop_assert_eq!(fwd.mentions_for(id, 1000), rev.mentions_for(id, 1000));
        }
    }

    #[test]
    fn interleaved_adds_and_removes_match_a_set_model(ops in proptest::collection::vec(op(), 0..80)) {
        let (papers, store) = ids(8, 9);
        let mut c = CollectionStore::new();
        let mut model: BTreeMap<(String, ArxivId), Timestamp> = BTreeMap::new();
        for (step, op) in ops.iter().enumerate() {
            let now = Timestamp(START + step as i64);
            match *op {
                Op::Add(u, p) => {
                    let key = (format!("u{u}"), papers[p].clone());
                    let fresh = !model.contains_key(&key);
                    let got = c.add(&key.0, &key.1, now, &store).unwrap();
                    prop_assert_eq!(got == AddOutcome::Added, fresh);
                    model.entry(key).or_insert(now);
                }
                Op::Remove(u, p) => {
                    let key = (format!("u{u}"), papers[p].clone());
                    let present = model.remove(&key).is_some();
                    prop_assert_eq!(c.remove(&key.0, &key.1) == RemoveOutcome::Removed, present);
                }
            }
        }
        for id in &papers {
            let want = model.keys().filter(|(_, p)| p == id).count() as u64;
            prop_assert_eq!(c.collection_count(id), want);
        }
        for u in 0..6 {
            let user = format!("u{u}");
            let mut want: Vec<(ArxivId, Timestamp)> =
                model.iter().filter(|((m, _), _)| *m == user).map(|((_, p), t)| (p.clone(), *t)).collect();
            want.sort_by(|a, b| (b.1, &b.0).cmp(&(a.1, &a.0)));
            prop_assert_eq!(c.list(&user), want);
        }
        let back: CollectionStore = serde_json::from_slice(&serde_json::to_vec(&c).unwrap()).unwrap();
        for id in &papers {
            prop_assert_eq!(back.collection_count(id), c.collection_count(id));
        }
    }
}

#[test]
fn unknown_paper_cannot_be_collected() {
    let (_, store) = ids(2, 1);
    let mut c = CollectionStore::new();
    let stranger = ArxivId::parse("0101.00001").unwrap();
    assert!(c.add("u", &stranger, Timestamp(0), &store).is_err());
    assert_eq!(c.collection_count(&stranger), 0);
}
