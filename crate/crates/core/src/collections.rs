use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::id::ArxivId;
use crate::store::PaperStore;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    AlreadyPresent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemoveOutcome {
    Removed,
    NotPresent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CollectionError {
    UnknownPaper(ArxivId),
    EmptyUser,
}

impl fmt::Display for CollectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollectionError::UnknownPaper(id) => write!(f, "unknown paper {id}"),
            CollectionError::EmptyUser => f.write_str("user id must not be empty"),
        }
    }
}

impl core::error::Error for CollectionError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionEntry {
    pub user_id: String,
    pub arxiv_id: ArxivId,
    pub added_at: Timestamp,
}

/// Per-user saved papers plus the per-paper count of distinct users.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "Vec<CollectionEntry>", into = "Vec<CollectionEntry>")]
pub struct CollectionStore {
    users: BTreeMap<String, BTreeMap<ArxivId, Timestamp>>,
    counts: BTreeMap<ArxivId, u64>,
}

impl CollectionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        user_id: &str,
        arxiv_id: &ArxivId,
        now: Timestamp,
        papers: &PaperStore,
    ) -> Result<AddOutcome, CollectionError> {
        if user_id.is_empty() {
            return Err(CollectionError::EmptyUser);
        }
        if !papers.contains(arxiv_id) {
            return Err(CollectionError::UnknownPaper(arxiv_id.clone()));
        }
        Ok(self.insert_entry(user_id, arxiv_id, now))
    }

    fn insert_entry(
        &mut self,
        user_id: &str,
        arxiv_id: &ArxivId,
        added_at: Timestamp,
    ) -> AddOutcome {
        let saved = self.users.entry(String::from(user_id)).or_default();
        if saved.contains_key(arxiv_id) {
            return AddOutcome::AlreadyPresent;
        }
        saved.insert(arxiv_id.clone(), added_at);
        *self.counts.entry(arxiv_id.clone()).or_insert(0) += 1;
        AddOutcome::Added
    }

    pub fn remove(&mut self, user_id: &str, arxiv_id: &ArxivId) -> RemoveOutcome {
        let Some(saved) = self.users.get_mut(user_id) else {
            return RemoveOutcome::NotPresent;
        };
        if saved.remove(arxiv_id).is_none() {
            return RemoveOutcome::NotPresent;
        }
        if saved.is_empty() {
            self.users.remove(user_id);
        }
        if let Some(count) = self.counts.get_mut(arxiv_id) {
            *count -= 1;
            if *count == 0 {
                self.counts.remove(arxiv_id);
            }
        }
        RemoveOutcome::Removed
    }

    /// Newest first; equal times by identifier descending.
    pub fn list(&self, user_id: &str) -> Vec<(ArxivId, Timestamp)> {
        let mut items: Vec<(ArxivId, Timestamp)> = self
            .users
            .get(user_id)
            .map(|saved| saved.iter().map(|(id, t)| (id.clone(), *t)).collect())
            .unwrap_or_default();
        items.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| b.0.cmp(&a.0)));
        items
    }

    pub fn contains(&self, user_id: &str, arxiv_id: &ArxivId) -> bool {
        self.users
            .get(user_id)
            .is_some_and(|saved| saved.contains_key(arxiv_id))
    }

    /// Number of distinct users holding the paper.
    pub fn collection_count(&self, arxiv_id: &ArxivId) -> u64 {
        self.counts.get(arxiv_id).copied().unwrap_or(0)
    }
}

impl From<Vec<CollectionEntry>> for CollectionStore {
    fn from(entries: Vec<CollectionEntry>) -> Self {
        let mut store = CollectionStore::new();
        for e in entries {
            store.insert_entry(&e.user_id, &e.arxiv_id, e.added_at);
        }
        store
    }
}

impl From<CollectionStore> for Vec<CollectionEntry> {
    fn from(store: CollectionStore) -> Self {
        store
            .users
            .into_iter()
            .flat_map(|(user_id, saved)| {
                saved
                    .into_iter()
                    .map(move |(arxiv_id, added_at)| CollectionEntry {
                        user_id: user_id.clone(),
                        arxiv_id,
                        added_at,
                    })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{PaperRecord, VersionInfo};
    use alloc::vec;

    fn papers(ids: &[&str]) -> PaperStore {
        let mut store = PaperStore::new();
        for id in ids {
            store
                .upsert(PaperRecord {
                    arxiv_id: ArxivId::parse(id).unwrap(),
                    versions: vec![VersionInfo {
                        version_number: 1,
                        submitted_at: Timestamp(0),
                    }],
                    title: "t".into(),
                    authors: vec![],
                    abstract_text: String::new(),
                    categories: vec!["cs.AI".into()],
                })
                .unwrap();
        }
        store
    }

    fn id(s: &str) -> ArxivId {
        ArxivId::parse(s).unwrap()
    }

    #[test]
    fn add_is_idempotent() {
        let ps = papers(&["1712.00001"]);
        let mut c = CollectionStore::new();
        let p = id("1712.00001");
        assert_eq!(c.add("u", &p, Timestamp(1), &ps), Ok(AddOutcome::Added));
        assert_eq!(
            c.add("u", &p, Timestamp(9), &ps),
            Ok(AddOutcome::AlreadyPresent)
        );
        assert_eq!(c.collection_count(&p), 1);
        assert_eq!(c.list("u"), [(p.clone(), Timestamp(1))]);
        assert_eq!(c.add("v", &p, Timestamp(2), &ps), Ok(AddOutcome::Added));
        assert_eq!(c.collection_count(&p), 2);
    }

    #[test]
    fn unknown_paper_and_empty_user() {
        let ps = papers(&[]);
        let mut c = CollectionStore::new();
        let p = id("1712.00001");
        assert_eq!(
            c.add("u", &p, Timestamp(1), &ps),
            Err(CollectionError::UnknownPaper(p.clone()))
        );
        assert_eq!(
            c.add("", &p, Timestamp(1), &papers(&["1712.00001"])),
            Err(CollectionError::EmptyUser)
        );
        assert_eq!(c.collection_count(&p), 0);
    }

    #[test]
    fn remove_and_replay() {
        let ps = papers(&["1712.00001"]);
        let mut c = CollectionStore::new();
        let p = id("1712.00001");
        assert_eq!(c.remove("u", &p), RemoveOutcome::NotPresent);
        c.add("u", &p, Timestamp(1), &ps).unwrap();
        assert_eq!(c.remove("u", &p), RemoveOutcome::Removed);
        assert_eq!(c.collection_count(&p), 0);
        c.add("u", &p, Timestamp(3), &ps).unwrap();
        assert_eq!(c.collection_count(&p), 1);
        assert_eq!(c.list("u").len(), 1);
    }

    #[test]
    fn list_order() {
        let ps = papers(&["1712.00001", "1712.00002", "1712.00003"]);
        let mut c = CollectionStore::new();
        c.add("u", &id("1712.00002"), Timestamp(1), &ps).unwrap();
        c.add("u", &id("1712.00001"), Timestamp(3), &ps).unwrap();
        c.add("u", &id("1712.00003"), Timestamp(3), &ps).unwrap();
        let list = c.list("u");
        let listed: Vec<&str> = list.iter().map(|(i, _)| i.as_str()).collect();
        // 00003 and 00001 share a timestamp
        assert_eq!(listed, ["1712.00003", "1712.00001", "1712.00002"]);
        assert!(c.list("nobody").is_empty());
    }
}
