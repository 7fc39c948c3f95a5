//! Allocation-only core of the pre-print portal.
//!
//! Everything here is pure data manipulation over in-memory structures:
//! record validation and merging, tokenization, the inverted index with
//! BM25 scoring, the four sort modes, and the mention and collection
//! signal stores. IO, clocks, wire formats and the HTTP surface live in the
//! `portal` crate.

#![no_std]

extern crate alloc;

pub mod collections;
pub mod id;
pub mod index;
pub mod mentions;
pub mod ranking;
pub mod record;
pub mod search;
pub mod store;
pub mod strip;
pub mod time;
pub mod tokenize;

pub use collections::{
    AddOutcome, CollectionEntry, CollectionError, CollectionStore, RemoveOutcome,
};
pub use id::{ArxivId, BadIdentifier};
pub use index::{Bm25Params, Candidate, Field, FieldMask, IndexError, IndexStats, InvertedIndex};
pub use mentions::{IngestReport, Ingested, MentionEvent, MentionStore};
pub use ranking::{filter_by_date, rank, RankError, RankedHit, Signal, Signals, SortKey, SortMode};
pub use record::{PaperRecord, RecordError, VersionInfo};
pub use search::{search, MentionsAndCollections, SearchError, SearchQuery, SearchResults};
pub use store::{PaperStore, UpsertOutcome};
pub use strip::{EmptyInput, StripLayout, ThumbnailStatus, Tile};
pub use time::{TimeRange, Timestamp};
pub use tokenize::tokenize;
