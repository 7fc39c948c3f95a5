//! In-memory portal state and its layout on disk.
//!
//! ```text
//! <data_dir>/store.bin           papers and mentions (PORTALST)
//! <data_dir>/collections.bin     user collections (PORTALCO)
//! <data_dir>/index.bin           inverted index (PORTALIX)
//! <data_dir>/cursor.json         harvest cursor
//! <data_dir>/thumbs/<id>.png     preview strips
//! <data_dir>/thumbs/status.json  per-paper thumbnail status
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use portal_core::{
    ArxivId, CollectionStore, InvertedIndex, MentionStore, PaperRecord, PaperStore, RecordError,
    ThumbnailStatus, UpsertOutcome,
};
use serde::{Deserialize, Serialize};

use crate::persist::{self, PersistError, COLLECTIONS_MAGIC, INDEX_MAGIC, STORE_MAGIC};

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn store_file(&self) -> PathBuf {
        self.root.join("store.bin")
    }

    pub fn collections_file(&self) -> PathBuf {
        self.root.join("collections.bin")
    }

    pub fn index_file(&self) -> PathBuf {
        self.root.join("index.bin")
    }

    pub fn cursor_file(&self) -> PathBuf {
        self.root.join("cursor.json")
    }

    pub fn thumbs_dir(&self) -> PathBuf {
        self.root.join("thumbs")
    }

    pub fn thumb_status_file(&self) -> PathBuf {
        self.thumbs_dir().join("status.json")
    }

    /// `<data_dir>/thumbs/<arxiv_id>.png`; legacy identifiers nest one
    /// directory deep (`thumbs/cs/0112017.png`).
    pub fn thumb_file(&self, id: &ArxivId) -> PathBuf {
        self.thumbs_dir().join(format!("{id}.png"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error(
        "index file {0} is missing but the store holds {1} papers; run `portal index rebuild`"
    )]
    IndexMissing(PathBuf, usize),
    #[error("index file {0} is out of date with the store; run `portal index rebuild`")]
    IndexStale(PathBuf),
    #[error("thumbnail status file {0} is unreadable: {1}")]
    ThumbStatus(PathBuf, String),
}

#[derive(Debug, Default)]
pub struct PortalState {
    pub papers: PaperStore,
    pub index: InvertedIndex,
    pub mentions: MentionStore,
    pub collections: CollectionStore,
    pub thumbnails: BTreeMap<ArxivId, ThumbnailStatus>,
}

#[derive(Serialize)]
struct StoreRef<'a> {
    papers: &'a PaperStore,
    mentions: &'a MentionStore,
}

#[derive(Deserialize)]
struct StoreOwned {
    papers: PaperStore,
    mentions: MentionStore,
}

impl PortalState {
    /// Inserts or merges `record` and re-indexes it when it changed.
    pub fn upsert_paper(&mut self, record: PaperRecord) -> Result<UpsertOutcome, RecordError> {
        let id = record.arxiv_id.clone();
        let outcome = self.papers.upsert(record)?;
        if outcome != UpsertOutcome::Unchanged {
            let stored = self.papers.get(&id).expect("just upserted");
            self.index.index_paper(stored);
        }
        Ok(outcome)
    }

    pub fn thumbnail_status(&self, id: &ArxivId) -> ThumbnailStatus {
        self.thumbnails
            .get(id)
            .cloned()
            .unwrap_or(ThumbnailStatus::Pending)
    }

    pub fn rebuild_index(&mut self) {
        let mut index = InvertedIndex::with_params(self.index.params());
        for record in self.papers.iter() {
            index.index_paper(record);
        }
        self.index = index;
    }

    pub fn load(dir: &DataDir) -> Result<Self, StateError> {
        let mut state = Self::load_without_index(dir)?;
        match persist::load::<InvertedIndex>(INDEX_MAGIC, &dir.index_file()) {
            Ok(index) => {
                if index.len() != state.papers.len()
                    || state.papers.iter().any(|p| !index.contains(&p.arxiv_id))
                {
                    return Err(StateError::IndexStale(dir.index_file()));
                }
                state.index = index;
            }
            Err(e) if e.is_not_found() && state.papers.is_empty() => {}
            Err(e) if e.is_not_found() => {
                return Err(StateError::IndexMissing(
                    dir.index_file(),
                    state.papers.len(),
                ))
            }
            Err(e) => return Err(e.into()),
        }
        Ok(state)
    }

    /// Loads everything except the index, which stays empty.
    pub fn load_without_index(dir: &DataDir) -> Result<Self, StateError> {
        let mut state = PortalState::default();
        match persist::load::<StoreOwned>(STORE_MAGIC, &dir.store_file()) {
            Ok(store) => {
                state.papers = store.papers;
                state.mentions = store.mentions;
            }
            Err(e) if e.is_not_found() => {}
            Err(e) => return Err(e.into()),
        }
        match persist::load::<CollectionStore>(COLLECTIONS_MAGIC, &dir.collections_file()) {
            Ok(collections) => state.collections = collections,
            Err(e) if e.is_not_found() => {}
            Err(e) => return Err(e.into()),
        }
        state.thumbnails = load_thumb_statuses(dir)?;
        Ok(state)
    }

    pub fn save_store(&self, dir: &DataDir) -> Result<(), PersistError> {
        let store = StoreRef {
            papers: &self.papers,
            mentions: &self.mentions,
        };
        persist::save(STORE_MAGIC, &store, &dir.store_file())
    }

    pub fn save_collections(&self, dir: &DataDir) -> Result<(), PersistError> {
        persist::save(
            COLLECTIONS_MAGIC,
            &self.collections,
            &dir.collections_file(),
        )
    }

    pub fn save_index(&self, dir: &DataDir) -> Result<(), PersistError> {
        persist::save(INDEX_MAGIC, &self.index, &dir.index_file())
    }

    pub fn save_thumbnails(&self, dir: &DataDir) -> Result<(), PersistError> {
        let bytes = serde_json::to_vec_pretty(&self.thumbnails).expect("statuses serialize");
        persist::write_atomic(&dir.thumb_status_file(), &bytes)
    }

    pub fn save_all(&self, dir: &DataDir) -> Result<(), PersistError> {
        self.save_store(dir)?;
        self.save_collections(dir)?;
        self.save_index(dir)?;
        self.save_thumbnails(dir)
    }
}

/// Statuses reconciled with the files on disk so that Done holds exactly
/// when the strip exists.
fn load_thumb_statuses(dir: &DataDir) -> Result<BTreeMap<ArxivId, ThumbnailStatus>, StateError> {
    let path = dir.thumb_status_file();
    let mut statuses: BTreeMap<ArxivId, ThumbnailStatus> = match std::fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map_err(|e| StateError::ThumbStatus(path.clone(), e.to_string()))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
        Err(e) => return Err(StateError::ThumbStatus(path, e.to_string())),
    };
    for (id, status) in statuses.iter_mut() {
        if status.is_done() && !dir.thumb_file(id).is_file() {
            *status = ThumbnailStatus::Pending;
        }
    }
    Ok(statuses)
}

/// Shared handle: one writer at a time, readers always see a whole state.
#[derive(Debug, Default)]
pub struct Portal {
    state: RwLock<PortalState>,
}

impl Portal {
    pub fn new(state: PortalState) -> Self {
        Portal {
            state: RwLock::new(state),
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, PortalState> {
        self.state
            .read()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn write(&self) -> RwLockWriteGuard<'_, PortalState> {
        self.state
            .write()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use portal_core::{Timestamp, VersionInfo};

    fn rec(id: &str, title: &str) -> PaperRecord {
        PaperRecord {
            arxiv_id: ArxivId::parse(id).unwrap(),
            versions: vec![VersionInfo {
                version_number: 1,
                submitted_at: Timestamp(1_512_086_400),
            }],
            title: title.into(),
            authors: vec!["A. Author".into()],
            abstract_text: "abstract".into(),
            categories: vec!["cs.AI".into()],
        }
    }

    #[test]
    fn save_and_reload() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = DataDir::new(tmp.path());
        let mut s = PortalState::default();
        s.upsert_paper(rec("1712.00001", "Quantum gauge")).unwrap();
        s.upsert_paper(rec("cs/0112017", "Legacy")).unwrap();
        s.save_all(&dir).unwrap();
        let back = PortalState::load(&dir).unwrap();
        assert_eq!(back.papers.len(), 2);
        assert_eq!(back.index.len(), 2);
    }

    #[test]
    fn empty_dir_loads_empty_state() {
        let tmp = tempfile::tempdir().unwrap();
        let s = PortalState::load(&DataDir::new(tmp.path())).unwrap();
        assert!(s.papers.is_empty());
    }

    #[test]
    fn corrupt_index_is_reported_not_rebuilt() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = DataDir::new(tmp.path());
        let mut s = PortalState::default();
        s.upsert_paper(rec("1712.00001", "Quantum gauge")).unwrap();
        s.save_all(&dir).unwrap();
        let mut bytes = std::fs::read(dir.index_file()).unwrap();
        let n = bytes.len();
        bytes[n - 3] ^= 0x01;
        std::fs::write(dir.index_file(), &bytes).unwrap();
        let err = PortalState::load(&dir).unwrap_err();
        assert!(
            matches!(err, StateError::Persist(PersistError::ChecksumMismatch(_))),
            "{err}"
        );
        // file is left as is
        assert_eq!(std::fs::read(dir.index_file()).unwrap(), bytes);

        std::fs::remove_file(dir.index_file()).unwrap();
        assert!(matches!(
            PortalState::load(&dir),
            Err(StateError::IndexMissing(_, 1))
        ));
    }

    #[test]
    fn stale_index_detected() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = DataDir::new(tmp.path());
        let mut s = PortalState::default();
        s.upsert_paper(rec("1712.00001", "One")).unwrap();
        s.save_index(&dir).unwrap();
        s.upsert_paper(rec("1712.00002", "Two")).unwrap();
        s.save_store(&dir).unwrap();
        assert!(matches!(
            PortalState::load(&dir),
            Err(StateError::IndexStale(_))
        ));
    }

    #[test]
    fn done_without_file_becomes_pending() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = DataDir::new(tmp.path());
        let id = ArxivId::parse("1712.00001").unwrap();
        let mut s = PortalState::default();
        s.thumbnails.insert(
            id.clone(),
            ThumbnailStatus::Done {
                generated_at: Timestamp(5),
            },
        );
        s.save_thumbnails(&dir).unwrap();
        assert_eq!(
            PortalState::load(&dir).unwrap().thumbnail_status(&id),
            ThumbnailStatus::Pending
        );
        std::fs::write(dir.thumb_file(&id), b"png").unwrap();
        assert!(PortalState::load(&dir)
            .unwrap()
            .thumbnail_status(&id)
            .is_done());
    }

    #[test]
    fn legacy_thumb_path_nests() {
        let dir = DataDir::new("/d");
        let id = ArxivId::parse("cs/0112017").unwrap();
        assert_eq!(
            dir.thumb_file(&id),
            PathBuf::from("/d/thumbs/cs/0112017.png")
        );
    }
}
