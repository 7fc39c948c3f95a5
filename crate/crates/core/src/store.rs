use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::id::ArxivId;
use crate::record::{validate_versions, PaperRecord, RecordError, VersionInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    Inserted,
    /// The stored record changed: new versions, newer metadata, or both.
    VersionsMerged,
    Unchanged,
}

/// Exactly one record per identifier.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PaperStore {
    papers: BTreeMap<ArxivId, PaperRecord>,
}

impl PaperStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn get(&self, id: &ArxivId) -> Option<&PaperRecord> {
        self.papers.get(id)
    }

    pub fn contains(&self, id: &ArxivId) -> bool {
        self.papers.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PaperRecord> {
        self.papers.values()
    }

    /// Inserts or merges `record`. Versions are unioned by number with the
    /// incoming record winning on conflicts; every other field is replaced
    /// by the incoming value.
    pub fn upsert(&mut self, record: PaperRecord) -> Result<UpsertOutcome, RecordError> {
        record.validate()?;
        let Some(existing) = self.papers.get_mut(&record.arxiv_id) else {
            self.papers.insert(record.arxiv_id.clone(), record);
            return Ok(UpsertOutcome::Inserted);
        };
        let merged = merge(existing, record);
        if merged == *existing {
            Ok(UpsertOutcome::Unchanged)
        } else {
            *existing = merged;
            Ok(UpsertOutcome::VersionsMerged)
        }
    }
}

fn merge(old: &PaperRecord, new: PaperRecord) -> PaperRecord {
    let mut by_number: BTreeMap<u32, VersionInfo> = old
        .versions
        .iter()
        .map(|v| (v.version_number, v.clone()))
        .collect();
    for v in &new.versions {
        by_number.insert(v.version_number, v.clone());
    }
    let union: Vec<VersionInfo> = by_number.into_values().collect();
    // Unions of two 1..k lists are contiguous, but an upstream date
    // correction can make the combined dates decrease; trust the newer list.
    let versions = if validate_versions(&union).is_ok() {
        union
    } else {
        new.versions.clone()
    };
    PaperRecord { versions, ..new }
}
