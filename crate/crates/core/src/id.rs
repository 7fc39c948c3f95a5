use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// A syntactically valid arXiv identifier without version suffix.
///
/// Accepts new-style `YYMM.NNNN` / `YYMM.NNNNN` and legacy
/// `archive/YYMMNNN` (for example `cs/0112017` or `math.AG/0601001`).
/// Ordering is plain lexicographic order on the identifier string, which is
/// what the ranking tie-break uses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArxivId(String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadIdentifier(pub String);

impl fmt::Display for BadIdentifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not an arXiv identifier: {:?}", self.0)
    }
}

impl core::error::Error for BadIdentifier {}

impl ArxivId {
    pub fn parse(s: &str) -> Result<Self, BadIdentifier> {
        if is_new_style(s) || is_legacy(s) {
            Ok(ArxivId(String::from(s)))
        } else {
            Err(BadIdentifier(String::from(s)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for legacy `archive/NNNNNNN` identifiers.
    pub fn is_legacy(&self) -> bool {
        self.0.contains('/')
    }
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn valid_yymm(s: &str) -> bool {
    let month = (s.as_bytes()[2] - b'0') * 10 + (s.as_bytes()[3] - b'0');
    (1..=12).contains(&month)
}

fn is_new_style(s: &str) -> bool {
    let Some((prefix, seq)) = s.split_once('.') else {
        return false;
    };
    prefix.len() == 4
        && all_digits(prefix)
        && valid_yymm(prefix)
        && (4..=5).contains(&seq.len())
        && all_digits(seq)
}

fn is_legacy(s: &str) -> bool {
    let Some((archive, number)) = s.split_once('/') else {
        return false;
    };
    if number.len() != 7 || !all_digits(number) || !valid_yymm(number) {
        return false;
    }
    let (name, subject) = match archive.split_once('.') {
        Some((name, subject)) => (name, Some(subject)),
        None => (archive, None),
    };
    let name_ok = !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b == b'-');
    let subject_ok =
        subject.is_none_or(|s| s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase()));
    name_ok && subject_ok
}

impl fmt::Display for ArxivId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for ArxivId {
    type Error = BadIdentifier;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        if is_new_style(&value) || is_legacy(&value) {
            Ok(ArxivId(value))
        } else {
            Err(BadIdentifier(value))
        }
    }
}

impl From<ArxivId> for String {
    fn from(id: ArxivId) -> String {
        id.0
    }
}

impl AsRef<str> for ArxivId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}
