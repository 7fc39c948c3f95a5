use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::id::ArxivId;
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionInfo {
    pub version_number: u32,
    pub submitted_at: Timestamp,
}

/// One pre-print and its version history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub arxiv_id: ArxivId,
    pub versions: Vec<VersionInfo>,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordError {
    MissingField(&'static str),
    NoVersions,
    NonContiguousVersions,
    VersionDatesDecrease,
    EmptyAuthor,
    BadCategory(String),
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordError::MissingField(name) => write!(f, "missing field: {name}"),
            RecordError::NoVersions => f.write_str("record has no versions"),
            RecordError::NonContiguousVersions => f.write_str("version numbers are not 1..k"),
            RecordError::VersionDatesDecrease => f.write_str("version dates decrease"),
            RecordError::EmptyAuthor => f.write_str("empty author name"),
            RecordError::BadCategory(c) => write!(f, "bad category code: {c:?}"),
        }
    }
}

impl core::error::Error for RecordError {}

impl PaperRecord {
    /// Timestamp of the newest version.
    pub fn latest_date(&self) -> Timestamp {
        self.versions
            .last()
            .map(|v| v.submitted_at)
            .expect("validated record has at least one version")
    }

    pub fn latest_version(&self) -> u32 {
        self.versions.last().map_or(0, |v| v.version_number)
    }

    pub fn primary_category(&self) -> &str {
        &self.categories[0]
    }

    pub fn validate(&self) -> Result<(), RecordError> {
        if self.title.trim().is_empty() {
            return Err(RecordError::MissingField("title"));
        }
        if self.categories.is_empty() {
            return Err(RecordError::MissingField("categories"));
        }
        if let Some(bad) = self.categories.iter().find(|c| !is_category_code(c)) {
            return Err(RecordError::BadCategory(bad.clone()));
        }
        if self.authors.iter().any(|a| a.trim().is_empty()) {
            return Err(RecordError::EmptyAuthor);
        }
        validate_versions(&self.versions)
    }
}

pub(crate) fn validate_versions(versions: &[VersionInfo]) -> Result<(), RecordError> {
    if versions.is_empty() {
        return Err(RecordError::NoVersions);
    }
    for (i, v) in versions.iter().enumerate() {
        if v.version_number as usize != i + 1 {
            return Err(RecordError::NonContiguousVersions);
        }
    }
    if versions
        .windows(2)
        .any(|w| w[1].submitted_at < w[0].submitted_at)
    {
        return Err(RecordError::VersionDatesDecrease);
    }
    Ok(())
}

/// `archive` or `archive.Subject`, e.g. `cs.AI`, `hep-th`, `cond-mat.mes-hall`.
pub fn is_category_code(code: &str) -> bool {
    let (archive, subject) = match code.split_once('.') {
        Some((a, s)) => (a, Some(s)),
        None => (code, None),
    };
    let archive_ok =
        !archive.is_empty() && archive.bytes().all(|b| b.is_ascii_lowercase() || b == b'-');
    let subject_ok = subject
        .is_none_or(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphabetic() || b == b'-'));
    archive_ok && subject_ok
}

/// Collapses every run of Unicode whitespace to one ASCII space and trims.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record() -> PaperRecord {
        PaperRecord {
            arxiv_id: ArxivId::parse("1712.00001").unwrap(),
            versions: vec![
                VersionInfo {
                    version_number: 1,
                    submitted_at: Timestamp(100),
                },
                VersionInfo {
                    version_number: 2,
                    submitted_at: Timestamp(200),
                },
            ],
            title: "A B".into(),
            authors: vec!["Ada Lovelace".into()],
            abstract_text: String::new(),
            categories: vec!["cs.AI".into(), "cs.LG".into()],
        }
    }

    #[test]
    fn valid_record_and_accessors() {
        let r = record();
        assert_eq!(r.validate(), Ok(()));
        assert_eq!(r.latest_date(), Timestamp(200));
        assert_eq!(r.primary_category(), "cs.AI");
    }

    #[test]
    fn version_invariants() {
        let mut r = record();
        r.versions[1].version_number = 3;
        assert_eq!(r.validate(), Err(RecordError::NonContiguousVersions));
        let mut r = record();
        r.versions[1].submitted_at = Timestamp(50);
        assert_eq!(r.validate(), Err(RecordError::VersionDatesDecrease));
        let mut r = record();
        r.versions.clear();
        assert_eq!(r.validate(), Err(RecordError::NoVersions));
    }

    #[test]
    fn missing_title_and_categories() {
        let mut r = record();
        r.title = "   ".into();
        assert_eq!(r.validate(), Err(RecordError::MissingField("title")));
        let mut r = record();
        r.categories.clear();
        assert_eq!(r.validate(), Err(RecordError::MissingField("categories")));
    }

    #[test]
    fn category_codes() {
        for ok in [
            "cs.AI",
            "hep-th",
            "math-ph",
            "q-bio.NC",
            "cond-mat.mes-hall",
            "physics.acc-ph",
            "stat.ML",
        ] {
            assert!(is_category_code(ok), "{ok}");
        }
        for bad in ["", "CS.AI", "cs.", ".AI", "cs.A I", "cs.AI.x", "cs1"] {
            assert!(!is_category_code(bad), "{bad}");
        }
    }

    #[test]
    fn whitespace_collapse() {
        assert_eq!(collapse_whitespace("  A   B "), "A B");
        assert_eq!(collapse_whitespace("a\n\tb\u{00A0}c"), "a b c");
        assert_eq!(collapse_whitespace(""), "");
    }
}
