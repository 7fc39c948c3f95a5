//! Conversions between core timestamps and the textual formats used on the
//! wire: RFC 3339 for the API and mention logs, `YYYY-MM-DD` datestamps and
//! RFC 2822 version dates for OAI-PMH.

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use portal_core::Timestamp;

pub fn to_datetime(t: Timestamp) -> DateTime<Utc> {
    DateTime::from_timestamp(t.unix(), 0).unwrap_or(DateTime::<Utc>::MIN_UTC)
}

pub fn rfc3339(t: Timestamp) -> String {
    to_datetime(t).to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Parses an RFC 3339 instant with any offset, normalized to UTC seconds.
pub fn parse_rfc3339(s: &str) -> Option<Timestamp> {
    DateTime::parse_from_rfc3339(s.trim())
        .ok()
        .map(|dt| Timestamp(dt.timestamp()))
}

pub fn parse_rfc2822(s: &str) -> Option<Timestamp> {
    DateTime::parse_from_rfc2822(s.trim())
        .ok()
        .map(|dt| Timestamp(dt.timestamp()))
}

pub fn rfc2822(t: Timestamp) -> String {
    to_datetime(t)
        .format("%a, %-d %b %Y %H:%M:%S GMT")
        .to_string()
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

pub fn date_start(d: NaiveDate) -> Timestamp {
    Timestamp(
        d.and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc()
            .timestamp(),
    )
}

pub fn date_of(t: Timestamp) -> NaiveDate {
    to_datetime(t).date_naive()
}

pub fn now() -> Timestamp {
    Timestamp(Utc::now().timestamp())
}
