//! Self-describing container for on-disk state.
//!
//! ```text
//! offset  size  field
//! 0       8     magic (b"PORTALIX" index, b"PORTALST" store, b"PORTALCO" collections)
//! 8       4     format version, u32 little-endian
//! 12      8     payload length, u64 little-endian
//! 20      4     CRC-32 (IEEE) of the payload, u32 little-endian
//! 24      n     payload, JSON
//! ```
//!
//! Any mismatch is reported as [`PersistError`]; nothing is rebuilt
//! implicitly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

pub const INDEX_MAGIC: [u8; 8] = *b"PORTALIX";
pub const STORE_MAGIC: [u8; 8] = *b"PORTALST";
pub const COLLECTIONS_MAGIC: [u8; 8] = *b"PORTALCO";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: not a portal file (bad magic bytes)")]
    BadMagic(PathBuf),
    #[error("{0}: unsupported format version {1}")]
    UnsupportedVersion(PathBuf, u32),
    #[error("{0}: truncated")]
    Truncated(PathBuf),
    #[error("{0}: checksum mismatch")]
    ChecksumMismatch(PathBuf),
    #[error("{path}: undecodable payload: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl PersistError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, PersistError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}

pub fn encode<T: Serialize>(magic: [u8; 8], value: &T) -> Vec<u8> {
    let payload = serde_json::to_vec(value).expect("in-memory state serializes");
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn decode<T: DeserializeOwned>(
    magic: [u8; 8],
    bytes: &[u8],
    path: &Path,
) -> Result<T, PersistError> {
    if bytes.len() < 8 || bytes[..8] != magic {
        return Err(PersistError::BadMagic(path.to_owned()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(PersistError::Truncated(path.to_owned()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion(path.to_owned(), version));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let crc = u32::from_le_bytes(bytes[20..24].try_into().unwrap());
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != len {
        return Err(PersistError::Truncated(path.to_owned()));
    }
    if crc32fast::hash(payload) != crc {
        return Err(PersistError::ChecksumMismatch(path.to_owned()));
    }
    serde_json::from_slice(payload).map_err(|source| PersistError::Decode {
        path: path.to_owned(),
        source,
    })
}

pub fn load<T: DeserializeOwned>(magic: [u8; 8], path: &Path) -> Result<T, PersistError> {
    let bytes = fs::read(path).map_err(|source| PersistError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode(magic, &bytes, path)
}

pub fn save<T: Serialize>(magic: [u8; 8], value: &T, path: &Path) -> Result<(), PersistError> {
    write_atomic(path, &encode(magic, value))
}

/// Writes through a sibling temp file and a rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PersistError> {
    let io = |source| PersistError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
