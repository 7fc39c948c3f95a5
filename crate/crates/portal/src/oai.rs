//! OAI-PMH envelopes and arXiv metadata records.
//!
//! Records use the `arXiv` metadata format. Version history is taken from
//! `<version version="vN"><date>…</date></version>` children when present
//! (as in `arXivRaw`); otherwise `created` is version 1 and `updated`, if
//! present, is recorded as version 2.

use std::fmt::Write as _;

use portal_core::record::collapse_whitespace;
use portal_core::{ArxivId, PaperRecord, RecordError, Timestamp, VersionInfo};
use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::Reader;

use crate::timefmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OaiError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("bad identifier: {0:?}")]
    BadIdentifier(String),
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error("record is marked deleted")]
    Deleted,
}

impl From<RecordError> for OaiError {
    fn from(e: RecordError) -> Self {
        match e {
            RecordError::MissingField(name) => OaiError::MissingField(name),
            other => OaiError::Invalid(other.to_string()),
        }
    }
}

/// Minimal element tree; names are local names with any prefix stripped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub text: String,
    pub children: Vec<Element>,
}

impl Element {
    pub fn child(&self, name: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.name == name)
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn child_text(&self, name: &str) -> Option<&str> {
        self.child(name).map(|c| c.text.as_str())
    }
}

/// Parses the first root element of `xml`.
pub fn parse_element(xml: &str) -> Result<Element, String> {
    let mut reader = Reader::from_str(xml);
    let mut stack: Vec<Element> = Vec::new();
    loop {
        match reader.read_event().map_err(|e| e.to_string())? {
            Event::Start(start) => stack.push(open(&start)?),
            Event::Empty(start) => {
                let el = open(&start)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => return Ok(el),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or("unbalanced end tag")?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => return Ok(el),
                }
            }
            Event::Text(t) => {
                if let Some(top) = stack.last_mut() {
                    top.text.push_str(&t.unescape().map_err(|e| e.to_string())?);
                } else if !t.iter().all(u8::is_ascii_whitespace) {
                    return Err("text outside the root element".into());
                }
            }
            Event::CData(c) => {
                if let Some(top) = stack.last_mut() {
                    top.text
                        .push_str(std::str::from_utf8(&c).map_err(|e| e.to_string())?);
                }
            }
            Event::Eof => return Err("unexpected end of document".into()),
            _ => {}
        }
    }
}

fn open(start: &quick_xml::events::BytesStart<'_>) -> Result<Element, String> {
    let name = String::from_utf8_lossy(start.local_name().as_ref()).into_owned();
    let mut attrs = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| e.to_string())?;
        let key = String::from_utf8_lossy(attr.key.local_name().as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| e.to_string())?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element {
        name,
        attrs,
        ..Element::default()
    })
}

pub fn parse_oai_record(xml_fragment: &str) -> Result<PaperRecord, OaiError> {
    let root = parse_element(xml_fragment).map_err(OaiError::MalformedRecord)?;
    record_from_element(&root)
}

pub fn record_from_element(record: &Element) -> Result<PaperRecord, OaiError> {
    if record.name != "record" {
        return Err(OaiError::MalformedRecord(format!(
            "expected <record>, found <{}>",
            record.name
        )));
    }
    if record.child("header").and_then(|h| h.attr("status")) == Some("deleted") {
        return Err(OaiError::Deleted);
    }
    let meta = record
        .child("metadata")
        .and_then(|m| m.children.first())
        .ok_or(OaiError::MissingField("metadata"))?;

    let raw_id = meta
        .child_text("id")
        .map(str::trim)
        .ok_or(OaiError::MissingField("id"))?;
    let arxiv_id =
        ArxivId::parse(raw_id).map_err(|_| OaiError::BadIdentifier(raw_id.to_owned()))?;

    let title = collapse_whitespace(
        meta.child_text("title")
            .ok_or(OaiError::MissingField("title"))?,
    );
    if title.is_empty() {
        return Err(OaiError::MissingField("title"));
    }
    let categories: Vec<String> = meta
        .child_text("categories")
        .ok_or(OaiError::MissingField("categories"))?
        .split_whitespace()
        .map(str::to_owned)
        .collect();
    if categories.is_empty() {
        return Err(OaiError::MissingField("categories"));
    }
    let abstract_text = meta
        .child_text("abstract")
        .map(collapse_whitespace)
        .unwrap_or_default();
    let authors = meta.child("authors").map(parse_authors).unwrap_or_default();
    let versions = parse_versions(meta)?;

    let record = PaperRecord {
        arxiv_id,
        versions,
        title,
        authors,
        abstract_text,
        categories,
    };
    record.validate()?;
    Ok(record)
}

fn parse_authors(authors: &Element) -> Vec<String> {
    let structured: Vec<String> = authors
        .children_named("author")
        .map(|a| {
            let parts = [
                a.child_text("forenames"),
                a.child_text("keyname"),
                a.child_text("suffix"),
            ];
            collapse_whitespace(&parts.into_iter().flatten().collect::<Vec<_>>().join(" "))
        })
        .filter(|name| !name.is_empty())
        .collect();
    if !structured.is_empty() || authors.children.iter().any(|c| c.name == "author") {
        return structured;
    }
    // arXivRaw style: "A. One, B. Two and C. Three"
    collapse_whitespace(&authors.text)
        .split(',')
        .flat_map(|chunk| chunk.split(" and "))
        .map(collapse_whitespace)
        .filter(|name| !name.is_empty())
        .collect()
}

fn parse_versions(meta: &Element) -> Result<Vec<VersionInfo>, OaiError> {
    let explicit: Vec<&Element> = meta.children_named("version").collect();
    if !explicit.is_empty() {
        let mut versions = Vec::with_capacity(explicit.len());
        for v in explicit {
            let label = v.attr("version").ok_or(OaiError::MissingField("version"))?;
            let number: u32 =
                label.trim().trim_start_matches('v').parse().map_err(|_| {
                    OaiError::MalformedRecord(format!("bad version label {label:?}"))
                })?;
            let date = v.child_text("date").ok_or(OaiError::MissingField("date"))?;
            let submitted_at = timefmt::parse_rfc2822(date)
                .ok_or_else(|| OaiError::MalformedRecord(format!("bad version date {date:?}")))?;
            versions.push(VersionInfo {
                version_number: number,
                submitted_at,
            });
        }
        versions.sort_by_key(|v| v.version_number);
        return Ok(versions);
    }
    let created = meta
        .child_text("created")
        .ok_or(OaiError::MissingField("created"))?;
    let mut versions = vec![VersionInfo {
        version_number: 1,
        submitted_at: day(created)?,
    }];
    if let Some(updated) = meta.child_text("updated") {
        versions.push(VersionInfo {
            version_number: 2,
            submitted_at: day(updated)?,
        });
    }
    Ok(versions)
}

fn day(s: &str) -> Result<Timestamp, OaiError> {
    timefmt::parse_date(s)
        .map(timefmt::date_start)
        .ok_or_else(|| OaiError::MalformedRecord(format!("bad date {s:?}")))
}

/// Writes `record` as an OAI `<record>` in the `arXiv` format with explicit
/// version elements, so that parsing the output yields `record` again.
pub fn serialize_record(record: &PaperRecord) -> String {
    let mut out = String::new();
    let id = escape(record.arxiv_id.as_str());
    let datestamp = timefmt::date_of(record.latest_date()).format("%Y-%m-%d");
    let _ = write!(
        out,
        "<record><header><identifier>oai:arXiv.org:{id}</identifier><datestamp>{datestamp}</datestamp></header>\
         <metadata><arXiv xmlns=\"http://arxiv.org/OAI/arXiv/\"><id>{id}</id>"
    );
    let _ = write!(
        out,
        "<created>{}</created>",
        timefmt::date_of(record.versions[0].submitted_at).format("%Y-%m-%d")
    );
    for v in &record.versions {
        let _ = write!(
            out,
            "<version version=\"v{}\"><date>{}</date></version>",
            v.version_number,
            timefmt::rfc2822(v.submitted_at)
        );
    }
    out.push_str("<authors>");
    for a in &record.authors {
        let _ = write!(
            out,
            "<author><keyname>{}</keyname></author>",
            escape(a.as_str())
        );
    }
    out.push_str("</authors>");
    let _ = write!(out, "<title>{}</title>", escape(record.title.as_str()));
    let _ = write!(
        out,
        "<categories>{}</categories>",
        escape(record.categories.join(" ").as_str())
    );
    let _ = write!(
        out,
        "<abstract>{}</abstract>",
        escape(record.abstract_text.as_str())
    );
    out.push_str("</arXiv></metadata></record>");
    out
}

/// One ListRecords response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListRecordsPage {
    pub records: Vec<Element>,
    /// Continuation token; `None` (or an empty element) marks the last page.
    pub resumption_token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Envelope {
    Page(ListRecordsPage),
    /// An OAI-PMH `<error code="…">` response.
    Error {
        code: String,
        message: String,
    },
}

pub fn parse_list_records(xml: &str) -> Result<Envelope, String> {
    let root = parse_element(xml)?;
    if root.name != "OAI-PMH" {
        return Err(format!("expected <OAI-PMH>, found <{}>", root.name));
    }
    if let Some(err) = root.child("error") {
        return Ok(Envelope::Error {
            code: err.attr("code").unwrap_or_default().to_owned(),
            message: collapse_whitespace(&err.text),
        });
    }
    let list = root
        .child("ListRecords")
        .ok_or("response has neither ListRecords nor error")?;
    let records = list.children_named("record").cloned().collect();
    let resumption_token = list
        .child("resumptionToken")
        .map(|t| t.text.trim().to_owned())
        .filter(|t| !t.is_empty());
    Ok(Envelope::Page(ListRecordsPage {
        records,
        resumption_token,
    }))
}

/// Builds a ListRecords response; used by fixture servers.
pub fn list_records_response(
    records: &[PaperRecord],
    resumption_token: Option<&str>,
    complete_size: usize,
    cursor: usize,
) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\"><ListRecords>",
    );
    for r in records {
        out.push_str(&serialize_record(r));
    }
    let _ = write!(
        out,
        "<resumptionToken cursor=\"{cursor}\" completeListSize=\"{complete_size}\">{}</resumptionToken>",
        escape(resumption_token.unwrap_or(""))
    );
    out.push_str("</ListRecords></OAI-PMH>");
    out
}

pub fn error_response(code: &str, message: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\"><error code=\"{}\">{}</error></OAI-PMH>",
        escape(code),
        escape(message)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"
<record xmlns="http://www.openarchives.org/OAI/2.0/">
  <header>
    <identifier>oai:arXiv.org:1712.00001</identifier>
    <datestamp>2017-12-04</datestamp>
    <setSpec>cs</setSpec>
  </header>
  <metadata>
    <arXiv xmlns="http://arxiv.org/OAI/arXiv/">
      <id>1712.00001</id>
      <created>2017-12-01</created>
      <authors>
        <author><keyname>Lovelace</keyname><forenames>Ada</forenames></author>
        <author><keyname>Babbage</keyname><forenames>Charles</forenames><suffix>Jr</suffix></author>
      </authors>
      <title>  A   B </title>
      <categories>cs.AI cs.LG</categories>
      <abstract>  Line one
        line &amp; two. </abstract>
    </arXiv>
  </metadata>
</record>"#;

    #[test]
    fn parses_fixture() {
        let r = parse_oai_record(FIXTURE).unwrap();
        assert_eq!(r.arxiv_id.as_str(), "1712.00001");
        assert_eq!(r.title, "A B");
        assert_eq!(
            r.versions,
            [VersionInfo {
                version_number: 1,
                submitted_at: Timestamp(1_512_086_400)
            }]
        );
        assert_eq!(r.categories, ["cs.AI", "cs.LG"]);
        assert_eq!(r.primary_category(), "cs.AI");
        assert_eq!(r.authors, ["Ada Lovelace", "Charles Babbage Jr"]);
        assert_eq!(r.abstract_text, "Line one line & two.");
    }

    #[test]
    fn missing_title() {
        let xml = FIXTURE.replace("<title>  A   B </title>", "");
        assert_eq!(parse_oai_record(&xml), Err(OaiError::MissingField("title")));
        let xml = FIXTURE.replace("<title>  A   B </title>", "<title>   </title>");
        assert_eq!(parse_oai_record(&xml), Err(OaiError::MissingField("title")));
    }

    #[test]
    fn missing_id_and_categories() {
        let xml = FIXTURE.replace("<id>1712.00001</id>", "");
        assert_eq!(parse_oai_record(&xml), Err(OaiError::MissingField("id")));
        let xml = FIXTURE.replace("<categories>cs.AI cs.LG</categories>", "");
        assert_eq!(
            parse_oai_record(&xml),
            Err(OaiError::MissingField("categories"))
        );
    }

    #[test]
    fn bad_identifier() {
        let xml = FIXTURE.replace("<id>1712.00001</id>", "<id>17-12</id>");
        assert_eq!(
            parse_oai_record(&xml),
            Err(OaiError::BadIdentifier("17-12".into()))
        );
    }

    #[test]
    fn malformed_xml() {
        assert!(matches!(
            parse_oai_record("<record><header>"),
            Err(OaiError::MalformedRecord(_))
        ));
        assert!(matches!(
            parse_oai_record("<record></wrong>"),
            Err(OaiError::MalformedRecord(_))
        ));
        assert!(matches!(
            parse_oai_record("not xml"),
            Err(OaiError::MalformedRecord(_))
        ));
    }

    #[test]
    fn updated_becomes_second_version() {
        let xml = FIXTURE.replace(
            "<created>2017-12-01</created>",
            "<created>2017-12-01</created><updated>2018-01-05</updated>",
        );
        let r = parse_oai_record(&xml).unwrap();
        assert_eq!(r.versions.len(), 2);
        assert_eq!(r.latest_date(), Timestamp(1_515_110_400));
    }

    #[test]
    fn explicit_versions_and_raw_authors() {
        let xml = FIXTURE
            .replace(
                "<created>2017-12-01</created>",
                r#"<version version="v2"><date>Tue, 5 Dec 2017 10:00:00 GMT</date></version>
                   <version version="v1"><date>Fri, 1 Dec 2017 09:30:00 GMT</date></version>"#,
            )
            .replace(
                &FIXTURE
                    [FIXTURE.find("<authors>").unwrap()..FIXTURE.find("</authors>").unwrap() + 10],
                "<authors>A. One, B. Two and C. Three</authors>",
            );
        let r = parse_oai_record(&xml).unwrap();
        assert_eq!(
            r.versions
                .iter()
                .map(|v| v.version_number)
                .collect::<Vec<_>>(),
            [1, 2]
        );
        assert_eq!(r.versions[0].submitted_at, Timestamp(1_512_120_600));
        assert_eq!(r.authors, ["A. One", "B. Two", "C. Three"]);
    }

    #[test]
    fn deleted_header() {
        let xml = FIXTURE.replace("<header>", "<header status=\"deleted\">");
        assert_eq!(parse_oai_record(&xml), Err(OaiError::Deleted));
    }

    #[test]
    fn serialize_round_trip() {
        let r = parse_oai_record(FIXTURE).unwrap();
        let again = parse_oai_record(&serialize_record(&r)).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn envelope() {
        let r = parse_oai_record(FIXTURE).unwrap();
        let xml = list_records_response(&[r.clone(), r], Some("tok-1"), 250, 0);
        let Envelope::Page(page) = parse_list_records(&xml).unwrap() else {
            panic!()
        };
        assert_eq!(page.records.len(), 2);
        assert_eq!(page.resumption_token.as_deref(), Some("tok-1"));

        let last = list_records_response(&[], None, 0, 0);
        let Envelope::Page(page) = parse_list_records(&last).unwrap() else {
            panic!()
        };
        assert_eq!(page.resumption_token, None);

        let err = error_response("badResumptionToken", "expired");
        assert_eq!(
            parse_list_records(&err).unwrap(),
            Envelope::Error {
                code: "badResumptionToken".into(),
                message: "expired".into()
            }
        );
        assert!(parse_list_records("<html/>").is_err());
    }
}
