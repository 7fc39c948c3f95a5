use portal_core::{
    ArxivId, CollectionEntry, Field, FieldMask, MentionEvent, PaperRecord, Timestamp, VersionInfo,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "qu", "r", "s", "t", "v", "z", "ch",
];
const NUCLEI: [&str; 6] = ["a", "e", "i", "o", "u", "ei"];

/// `n` distinct pronounceable words; the first few double as topical terms.
pub fn vocabulary(n: usize) -> Vec<String> {
    let mut words = Vec::with_capacity(n);
    let mut i = 0usize;
    while words.len() < n {
        let mut w = String::new();
        let mut k = i;
        loop {
            w.push_str(ONSETS[k % ONSETS.len()]);
            k /= ONSETS.len();
            w.push_str(NUCLEI[k % NUCLEI.len()]);
            k /= NUCLEI.len();
            if k == 0 {
                break;
            }
        }
        words.push(w);
        i += 1;
    }
    words
}

pub const CATEGORIES: [&str; 10] = [
    "cs.AI",
    "cs.LG",
    "cs.CL",
    "cs.IR",
    "stat.ML",
    "math.PR",
    "hep-th",
    "quant-ph",
    "cond-mat.mes-hall",
    "astro-ph.GA",
];

const SURNAMES: [&str; 12] = [
    "Smith",
    "Nguyen",
    "Garcia",
    "Kowalski",
    "Okafor",
    "Tanaka",
    "Ivanova",
    "Haddad",
    "Rossi",
    "Lindqvist",
    "Chen",
    "Moreau",
];

/// Shape of a synthetic corpus.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub papers: usize,
    pub vocabulary: usize,
    pub title_words: std::ops::RangeInclusive<usize>,
    pub abstract_words: std::ops::RangeInclusive<usize>,
    /// Unix seconds of the earliest first-version date.
    pub epoch: i64,
    /// Span of first-version dates, in days.
    pub days: i64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            papers: 200,
            vocabulary: 400,
            title_words: 4..=10,
            abstract_words: 30..=80,
            epoch: 1_483_228_800, // 2017-01-01
            days: 3 * 365,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocabulary: Vec<String>,
    pub papers: Vec<PaperRecord>,
}

/// Skewed index into `0..n`: low indices are much more frequent.
fn zipfish(rng: &mut impl Rng, n: usize) -> usize {
    let u: f64 = rng.gen();
    ((n as f64).powf(u) - 1.0).floor() as usize % n
}

fn words(rng: &mut impl Rng, vocab: &[String], count: usize) -> String {
    (0..count)
        .map(|_| vocab[zipfish(rng, vocab.len())].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// New-style identifier for the `i`th paper submitted in `yymm`.
pub fn new_style_id(yymm: u32, i: usize) -> ArxivId {
    ArxivId::parse(&format!("{yymm:04}.{:05}", i + 1)).expect("valid identifier")
}

impl Corpus {
    pub fn generate(spec: &CorpusSpec, seed: u64) -> Corpus {
        let mut rng = rng(seed);
        let vocabulary = vocabulary(spec.vocabulary);
        let mut papers = Vec::with_capacity(spec.papers);
        for i in 0..spec.papers {
            // a handful of legacy identifiers exercise the slash form
            let arxiv_id = if i % 97 == 13 {
                if i < 999 {
                    ArxivId::parse(&format!("hep-th/{:07}", 9_901_000 + i)).unwrap()
                } else {
                    let k = i / 97;
                    ArxivId::parse(&format!(
                        "hep-th/99{:02}{:03}",
                        2 + (k / 999) % 11,
                        k % 999 + 1
                    ))
                    .unwrap()
                }
            } else {
                new_style_id(1700 + (i / 99_999) as u32 + 1, i % 99_999)
            };
            let first = spec.epoch
                + rng.gen_range(0..spec.days.max(1)) * Timestamp::DAY
                + rng.gen_range(0..Timestamp::DAY);
            let mut versions = vec![VersionInfo {
                version_number: 1,
                submitted_at: Timestamp(first),
            }];
            let extra = [0, 0, 0, 1, 1, 2][rng.gen_range(0..6)];
            for v in 0..extra {
                let prev = versions[v].submitted_at.0;
                versions.push(VersionInfo {
                    version_number: v as u32 + 2,
                    submitted_at: Timestamp(prev + rng.gen_range(0..120) * Timestamp::DAY),
                });
            }
            let n_title = rng.gen_range(spec.title_words.clone());
            let n_abs = rng.gen_range(spec.abstract_words.clone());
            let n_auth = rng.gen_range(1..=4);
            let authors = (0..n_auth)
                .map(|_| {
                    let initial = (b'A' + rng.gen_range(0..26u8)) as char;
                    format!("{initial}. {}", SURNAMES.choose(&mut rng).unwrap())
                })
                .collect();
            let mut categories: Vec<String> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let c = CATEGORIES[zipfish(&mut rng, CATEGORIES.len())].to_owned();
                if !categories.contains(&c) {
                    categories.push(c);
                }
            }
            papers.push(PaperRecord {
                arxiv_id,
                versions,
                title: words(&mut rng, &vocabulary, n_title),
                authors,
                abstract_text: words(&mut rng, &vocabulary, n_abs),
                categories,
            });
        }
        Corpus { vocabulary, papers }
    }

    /// A query of one to four vocabulary words (sometimes an author surname or
    /// category) under either every field or a random proper subset of them.
    pub fn random_query(&self, rng: &mut impl Rng) -> (String, FieldMask) {
        let n = rng.gen_range(1..=4);
        let mut parts = Vec::new();
        for _ in 0..n {
            match rng.gen_range(0..10) {
                0 => parts.push(SURNAMES.choose(rng).unwrap().to_string()),
                1 => parts.push(CATEGORIES.choose(rng).unwrap().to_string()),
                _ => parts
                    .push(self.vocabulary[zipfish(rng, self.vocabulary.len().min(200))].clone()),
            }
        }
        let mask = if rng.gen_bool(0.3) {
            FieldMask::ALL
        } else {
            let bits: u8 = rng.gen_range(1..0b1_1111);
            FieldMask::from_fields(
                Field::ALL
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| bits & (1 << i) != 0)
                    .map(|(_, f)| f),
            )
        };
        (parts.join(" "), mask)
    }
}

/// `n` mention events over `ids`; `duplicates` of them reuse an earlier
/// tweet_id (with otherwise different content).
pub fn mention_events(
    rng: &mut impl Rng,
    ids: &[ArxivId],
    n: usize,
    duplicates: usize,
    start: i64,
    span: i64,
) -> Vec<MentionEvent> {
    assert!(duplicates < n.max(1), "need at least one original event");
    let distinct = n - duplicates;
    let mut events: Vec<MentionEvent> = (0..distinct)
        .map(|i| MentionEvent {
            tweet_id: format!("{}", 900_000_000_000u64 + i as u64),
            arxiv_id: ids[zipfish(rng, ids.len())].clone(),
            timestamp: Timestamp(start + rng.gen_range(0..span.max(1))),
            url: format!(
                "https://twitter.com/i/web/status/{}",
                900_000_000_000u64 + i as u64
            ),
            author_handle: rng
                .gen_bool(0.5)
                .then(|| format!("user{}", rng.gen_range(0..50))),
        })
        .collect();
    let picks: Vec<usize> = (0..distinct)
        .collect::<Vec<_>>()
        .choose_multiple(rng, duplicates.min(distinct))
        .copied()
        .collect();
    for k in 0..duplicates {
        let src = picks[k % picks.len()];
        let mut dup = events[src].clone();
        dup.arxiv_id = ids[rng.gen_range(0..ids.len())].clone();
        dup.timestamp = Timestamp(start + rng.gen_range(0..span.max(1)));
        events.push(dup);
    }
    events.shuffle(rng);
    events
}

/// Random (user, paper) additions; may repeat pairs.
pub fn collection_entries(
    rng: &mut impl Rng,
    ids: &[ArxivId],
    users: usize,
    n: usize,
    start: i64,
) -> Vec<CollectionEntry> {
    (0..n)
        .map(|i| CollectionEntry {
            user_id: format!("user-{}", rng.gen_range(0..users.max(1))),
            arxiv_id: ids[zipfish(rng, ids.len())].clone(),
            added_at: Timestamp(start + i as i64 * 60),
        })
        .collect()
}
