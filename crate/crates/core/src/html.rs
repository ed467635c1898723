//! CERIF-RDF inside HTML pages.
//!
//! Rendered pages carry their record twice: as a visible table and as an
//! RDF document inside a `<!--CERIF-RDF ... -->` comment. Extraction looks
//! for `rdf:RDF` elements anywhere in the page text, commented or inline.

use quick_xml::escape::escape;

use crate::error::{Error, Result, Warning, WarningKind};
use crate::model::{FieldValue, Record};
use crate::rdf::{parse_document_with, serialize_document_with, CodecOptions, RecordSet};
use crate::validate::validate_record;

pub const EMBED_OPEN: &str = "<!--CERIF-RDF";
pub const EMBED_CLOSE: &str = "-->";

const ROOT_OPEN: &str = "<rdf:RDF";
const ROOT_CLOSE: &str = "</rdf:RDF";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedDocument {
    /// Byte offset of `<rdf:RDF` in the page.
    pub offset: usize,
    pub records: RecordSet,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionResult {
    pub documents: Vec<ExtractedDocument>,
    pub page_uri: Option<String>,
    /// Blocks that could not be parsed, one entry each.
    pub warnings: Vec<Warning>,
}

impl ExtractionResult {
    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.documents.iter().flat_map(|d| d.records.records.values())
    }
}

/// End of the start tag beginning at `from` (index just past `>`), and
/// whether it is self-closing. Quoted `>` are skipped.
fn start_tag_end(text: &str, from: usize) -> Option<(usize, bool)> {
    let bytes = text.as_bytes();
    let mut quote = None;
    for (i, &b) in bytes.iter().enumerate().skip(from) {
        match (quote, b) {
            (Some(q), _) if b == q => quote = None,
            (Some(_), _) => {}
            (None, b'"' | b'\'') => quote = Some(b),
            (None, b'>') => return Some((i + 1, i > from && bytes[i - 1] == b'/')),
            _ => {}
        }
    }
    None
}

/// A block's byte range, or where a broken block starts and why.
type Block = Result<(usize, usize), (usize, &'static str)>;

/// Byte ranges of candidate `rdf:RDF` blocks, in page order.
fn find_blocks(html: &str) -> Vec<Block> {
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(rel) = html[pos..].find(ROOT_OPEN) {
        let start = pos + rel;
        let after_name = start + ROOT_OPEN.len();
        let boundary = html[after_name..].chars().next();
        if !matches!(boundary, Some(c) if c.is_whitespace() || c == '>' || c == '/') {
            pos = after_name;
            continue;
        }
        let Some((tag_end, self_closing)) = start_tag_end(html, after_name) else {
            out.push(Err((start, "start tag is never closed")));
            break;
        };
        if self_closing {
            out.push(Ok((start, tag_end)));
            pos = tag_end;
            continue;
        }
        let mut search = tag_end;
        let end = loop {
            let Some(rel) = html[search..].find(ROOT_CLOSE) else {
                break None;
            };
            let close = search + rel;
            let tail = &html[close + ROOT_CLOSE.len()..];
            let trimmed = tail.trim_start();
            if let Some(rest) = trimmed.strip_prefix('>') {
                break Some(html.len() - rest.len());
            }
            search = close + ROOT_CLOSE.len();
        };
        match end {
            Some(end) => {
                out.push(Ok((start, end)));
                pos = end;
            }
            None => {
                out.push(Err((start, "no closing </rdf:RDF>")));
                break;
            }
        }
    }
    out
}

pub fn extract_rdf(html: &str, page_uri: Option<&str>) -> ExtractionResult {
    extract_rdf_with(html, page_uri, &CodecOptions::default())
}

pub fn extract_rdf_with(html: &str, page_uri: Option<&str>, opts: &CodecOptions) -> ExtractionResult {
    let mut result = ExtractionResult {
        documents: Vec::new(),
        page_uri: page_uri.map(str::to_string),
        warnings: Vec::new(),
    };
    for block in find_blocks(html) {
        match block {
            Ok((start, end)) => match parse_document_with(&html[start..end], opts) {
                Ok((records, warnings)) => result.documents.push(ExtractedDocument {
                    offset: start,
                    records,
                    warnings,
                }),
                Err(e) => result.warnings.push(Warning::new(
                    WarningKind::BadBlock,
                    format!("block at byte {start}: {e}"),
                )),
            },
            Err((start, why)) => result.warnings.push(Warning::new(
                WarningKind::BadBlock,
                format!("block at byte {start}: {why}"),
            )),
        }
    }
    result
}

fn field_label(name: &str) -> &'static str {
    match name {
        "proj_status" => "Status",
        "proj_startdate" => "Start date",
        "proj_enddate" => "End date",
        "proj_uri" | "per_uri" => "URI",
        "proj_prizeaward" | "per_prize_awards" | "org_prizeaward" => "Prizes and awards",
        "proj_title" => "Title",
        "proj_abstract" => "Abstract",
        "proj_keywords" => "Keywords",
        "per_family_names" => "Family names",
        "per_first_names" => "First names",
        "per_sex" => "Sex",
        "expert_skill" => "Expert skill",
        "contact.telephone" => "Telephone",
        "contact.fax" => "Fax",
        "contact.email" => "E-mail",
        "contact.uri" => "Contact URI",
        "contact.address" => "Address",
        "org_acronym" => "Acronym",
        "org_url" => "URL",
        "orgunit_name" => "Name",
        "orgunit_description" => "Description",
        "ou_ou_relation" => "Related unit",
        "relation" => "Relation",
        _ => "Field",
    }
}

fn field_cell(value: &FieldValue) -> String {
    match value {
        FieldValue::Text(t) => escape(t).into_owned(),
        FieldValue::Translated(t) => format!(
            "<span lang=\"{}\" data-translation=\"{}\">{}</span>",
            escape(&t.language),
            t.translation.code(),
            escape(&t.text)
        ),
        FieldValue::Qualified { qualifier, text } => match qualifier {
            Some(q) => format!("{} <small>({})</small>", escape(text), escape(q)),
            None => escape(text).into_owned(),
        },
        FieldValue::Link {
            role,
            target,
            mandatory,
        } => format!(
            "{}: {}{}",
            escape(role),
            escape(target.to_string()),
            if *mandatory { " (mandatory)" } else { "" }
        ),
    }
}

pub fn render_html(r: &Record) -> Result<String> {
    render_html_with(r, &CodecOptions::default())
}

/// Renders one record as a standalone page with the record's own RDF
/// document embedded in a comment.
pub fn render_html_with(r: &Record, opts: &CodecOptions) -> Result<String> {
    let key = r.key();
    let violations = validate_record(r);
    if !violations.is_empty() {
        return Err(Error::InvariantViolation {
            context: key.to_string(),
            violations: violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", "),
        });
    }
    let mut rs = RecordSet::new();
    rs.insert(r.clone())?;
    let doc = serialize_document_with(&rs, opts)?;

    let ty = key.record_type.token();
    let id = escape(&key.id);
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str(&format!("<title>{ty} {id}</title>\n</head>\n<body>\n"));
    html.push_str(&format!("<h1>{ty} {id}</h1>\n"));
    html.push_str(&format!("<table class=\"cerif-{ty}\">\n"));
    html.push_str(&format!("<tr><th>Identifier</th><td>{id}</td></tr>\n"));
    for (name, value) in r.fields() {
        html.push_str(&format!(
            "<tr class=\"{name}\"><th>{}</th><td>{}</td></tr>\n",
            field_label(name),
            field_cell(&value)
        ));
    }
    html.push_str("</table>\n");
    html.push_str(EMBED_OPEN);
    html.push('\n');
    html.push_str(doc.trim_end());
    html.push('\n');
    html.push_str(EMBED_CLOSE);
    html.push_str("\n</body>\n</html>\n");
    Ok(html)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OrgUnit, TranslatedText, TranslationType};

    fn unit() -> Record {
        let mut o = OrgUnit::new("U1");
        o.names
            .push(TranslatedText::new("de", TranslationType::Original, "Außen <&> --> x"));
        Record::OrgUnit(o)
    }

    #[test]
    fn no_rdf() {
        let r = extract_rdf("<html><body>nothing</body></html>", None);
        assert!(r.documents.is_empty());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn closure_with_markup_in_text() {
        let r = unit();
        let page = render_html(&r).unwrap();
        assert_eq!(page.matches("-->").count(), 1);
        let got = extract_rdf(&page, Some("http://x/"));
        assert_eq!(got.records().cloned().collect::<Vec<_>>(), vec![r]);
        assert_eq!(got.page_uri.as_deref(), Some("http://x/"));
    }

    #[test]
    fn minimal_rows() {
        let page = render_html(&unit()).unwrap();
        assert!(page.contains("<tr><th>Identifier</th><td>U1</td></tr>"));
        assert_eq!(page.matches("<tr class=").count(), 1);
    }

    #[test]
    fn invalid_record_is_rejected() {
        let r = Record::OrgUnit(OrgUnit::new("U2"));
        assert!(matches!(render_html(&r), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn blocks_and_bad_blocks() {
        let good = "<rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\"/>";
        let bad = "<rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\"><a></b></rdf:RDF>";
        let page = format!("<p>{good}</p><!-- {bad} --><rdf:RDFx>");
        let got = extract_rdf(&page, None);
        assert_eq!(got.documents.len(), 1);
        assert_eq!(got.documents[0].offset, 3);
        assert_eq!(got.warnings.len(), 1);
        assert_eq!(got.warnings[0].kind, WarningKind::BadBlock);
    }

    #[test]
    fn unterminated_block() {
        let got = extract_rdf("<rdf:RDF xmlns:rdf=\"x\"> ...", None);
        assert!(got.documents.is_empty());
        assert_eq!(got.warnings.len(), 1);
    }
}
