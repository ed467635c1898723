//! FODOK/AURIS tagged-record export: parsing and mapping to CERIF.
//!
//! Records are delimited by `<RECORD>` and `</RECORD>`. Inside, a line
//! starting with `<TAG>` (three uppercase letters) opens a value that runs
//! until the next tag line or the end of the record; there are no closing
//! tags.

use crate::error::{Error, Result, Warning, WarningKind};
use crate::model::{
    normalize_whitespace, Contact, ExpertSkill, OrgUnit, OuOuRelation, PartialDate, Person,
    Record, RecordKey, RecordType, Relation, TranslatedText, TranslationType,
};

pub const KNOWN_TAGS: [&str; 26] = [
    "HRU", "KUG", "KUE", "RUG", "RUE", "DUG", "DUE", "SEQ", "SRC", "UPD", "CON", "STR", "PCD",
    "TWN", "TAC", "TEL", "FAX", "EML", "URL", "RCN", "UNG", "UNE", "FAG", "FAE", "DEG", "DEE",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegacyEntry {
    pub tag: String,
    pub value: String,
    pub known: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LegacyRecord {
    pub entries: Vec<LegacyEntry>,
    /// 1-based line of the opening `<RECORD>`.
    pub line: usize,
}

impl LegacyRecord {
    pub fn values<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.tag == tag)
            .map(|e| e.value.as_str())
    }

    /// First non-empty value of `tag`.
    pub fn first(&self, tag: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.tag == tag && !e.value.is_empty())
            .map(|e| e.value.as_str())
    }

    pub fn count(&self, tag: &str) -> usize {
        self.entries.iter().filter(|e| e.tag == tag).count()
    }
}

/// Decodes export bytes in the encoding named by `label` (WHATWG labels,
/// e.g. `utf-8`, `latin1`, `windows-1252`).
pub fn decode(bytes: &[u8], label: &str) -> Result<String> {
    let encoding = encoding_rs::Encoding::for_label(label.trim().as_bytes())
        .ok_or_else(|| Error::UnknownEncoding(label.to_string()))?;
    let (text, _, _) = encoding.decode(bytes);
    Ok(text.into_owned())
}

enum Line<'a> {
    Tag(&'a str, &'a str),
    Text(&'a str),
}

fn classify(line: &str, lineno: usize) -> Result<Line<'_>> {
    let Some(rest) = line.strip_prefix('<') else {
        return Ok(Line::Text(line));
    };
    let Some(close) = rest.find('>') else {
        return Ok(Line::Text(line));
    };
    let token = &rest[..close];
    if token.is_empty() || token.bytes().all(|b| b.is_ascii_alphabetic()) {
        if token.len() == 3 && token.bytes().all(|b| b.is_ascii_uppercase()) {
            return Ok(Line::Tag(token, &rest[close + 1..]));
        }
        return Err(Error::MalformedTagLine {
            line: lineno,
            text: line.to_string(),
        });
    }
    Ok(Line::Text(line))
}

pub fn parse_sgml(text: &str) -> Result<Vec<LegacyRecord>> {
    const OPEN: &str = "<RECORD>";
    const CLOSE: &str = "</RECORD>";

    let mut records = Vec::new();
    let mut current: Option<(LegacyRecord, Vec<(String, String)>)> = None;

    let finish = |rec: LegacyRecord, raw: Vec<(String, String)>| LegacyRecord {
        entries: raw
            .into_iter()
            .map(|(tag, value)| LegacyEntry {
                known: KNOWN_TAGS.contains(&tag.as_str()),
                value: normalize_whitespace(&value),
                tag,
            })
            .collect(),
        ..rec
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let mut rest = raw_line.trim_start();
        loop {
            if let Some(after) = rest.strip_prefix(OPEN) {
                if let Some((rec, _)) = &current {
                    return Err(Error::UnterminatedRecord(rec.line));
                }
                current = Some((
                    LegacyRecord {
                        entries: Vec::new(),
                        line: lineno,
                    },
                    Vec::new(),
                ));
                rest = after.trim_start();
                continue;
            }
            let (content, closes, after) = match rest.find(CLOSE) {
                Some(pos) if current.is_some() => {
                    (&rest[..pos], true, &rest[pos + CLOSE.len()..])
                }
                _ => (rest, false, ""),
            };
            let content = content.trim_end();
            if !content.is_empty() {
                let Some((_, entries)) = current.as_mut() else {
                    return Err(Error::MalformedTagLine {
                        line: lineno,
                        text: raw_line.to_string(),
                    });
                };
                match classify(content, lineno)? {
                    Line::Tag(tag, value) => entries.push((tag.to_string(), value.to_string())),
                    Line::Text(text) => match entries.last_mut() {
                        Some((_, value)) => {
                            value.push(' ');
                            value.push_str(text);
                        }
                        None => {
                            return Err(Error::MalformedTagLine {
                                line: lineno,
                                text: raw_line.to_string(),
                            })
                        }
                    },
                }
            }
            if closes {
                let (rec, raw) = current.take().expect("checked above");
                records.push(finish(rec, raw));
                rest = after.trim_start();
                if !rest.is_empty() {
                    continue;
                }
            }
            break;
        }
    }
    if let Some((rec, _)) = current {
        return Err(Error::UnterminatedRecord(rec.line));
    }
    Ok(records)
}

/// Output of [`map_record`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedRecord {
    pub orgunit: OrgUnit,
    /// Head-of-unit person and parent org-unit stubs.
    pub related: Vec<Record>,
    pub warnings: Vec<Warning>,
}

impl MappedRecord {
    pub fn into_records(self) -> Vec<Record> {
        std::iter::once(Record::OrgUnit(self.orgunit))
            .chain(self.related)
            .collect()
    }
}

/// Identifier-safe slug: uppercase ASCII, German letters transliterated,
/// other runs of non-alphanumerics collapsed to `-`.
pub fn slug(text: &str) -> String {
    let mut out = String::new();
    for ch in text.chars() {
        let piece: &str = match ch {
            'ä' | 'Ä' => "AE",
            'ö' | 'Ö' => "OE",
            'ü' | 'Ü' => "UE",
            'ß' => "SS",
            c if c.is_ascii_alphanumeric() => {
                out.push(c.to_ascii_uppercase());
                continue;
            }
            _ => "-",
        };
        if piece == "-" {
            if !out.is_empty() && !out.ends_with('-') {
                out.push('-');
            }
        } else {
            out.push_str(piece);
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// Splits `"Family, First (Title)"`; the parenthesized part is returned
/// separately.
fn split_person_name(text: &str) -> (String, String, Option<String>) {
    let (name, dropped) = match (text.find('('), text.rfind(')')) {
        (Some(open), Some(close)) if open < close => (
            format!("{} {}", &text[..open], &text[close + 1..]),
            Some(text[open..=close].to_string()),
        ),
        _ => (text.to_string(), None),
    };
    let (family, first) = match name.split_once(',') {
        Some((f, rest)) => (normalize_whitespace(f), normalize_whitespace(rest)),
        None => (normalize_whitespace(&name), String::new()),
    };
    (family, first, dropped)
}

fn parse_iso_date(text: &str) -> Option<PartialDate> {
    let mut parts = text.trim().split('-');
    let year = parts.next()?.parse().ok()?;
    let month = parts.next().map(str::parse).transpose().ok()?;
    let day = parts.next().map(str::parse).transpose().ok()?;
    if parts.next().is_some() {
        return None;
    }
    PartialDate::new(year, month, day).ok()
}

fn stub(id: String, german: Option<&str>, english: Option<&str>) -> OrgUnit {
    let mut unit = OrgUnit::new(id);
    if let Some(de) = german {
        unit.names
            .push(TranslatedText::new("de", TranslationType::Original, de));
    }
    if let Some(en) = english {
        unit.names
            .push(TranslatedText::new("en", TranslationType::Human, en));
    }
    unit
}

fn prefixed(area: Option<&str>, number: Option<&str>) -> Option<String> {
    number.map(|n| match area {
        Some(a) => normalize_whitespace(&format!("{a} {n}")),
        None => n.to_string(),
    })
}

/// Maps one legacy record to an org unit plus the records it implies.
pub fn map_record(lr: &LegacyRecord, export_date: &PartialDate) -> Result<MappedRecord> {
    let id = lr.first("RCN").ok_or(Error::MissingRcn)?.to_string();
    let key = RecordKey::new(RecordType::OrgUnit, id.clone());
    let mut warnings = Vec::new();
    let mut unit = OrgUnit::new(id.clone());
    let mut related = Vec::new();

    for entry in &lr.entries {
        let value = entry.value.as_str();
        match entry.tag.as_str() {
            "DEG" if !value.is_empty() => unit
                .names
                .push(TranslatedText::new("de", TranslationType::Original, value)),
            "DEE" if !value.is_empty() => unit
                .names
                .push(TranslatedText::new("en", TranslationType::Human, value)),
            "DUG" if !value.is_empty() => unit
                .descriptions
                .push(TranslatedText::new("de", TranslationType::Original, value)),
            "DUE" if !value.is_empty() => unit
                .descriptions
                .push(TranslatedText::new("en", TranslationType::Human, value)),
            "KUG" | "KUE" if !value.is_empty() => unit.expert_skills.push(ExpertSkill {
                role: None,
                skill: value.to_string(),
            }),
            "RUG" | "RUE" if !value.is_empty() => unit.expert_skills.push(ExpertSkill {
                role: Some("research-field".into()),
                skill: value.to_string(),
            }),
            "SEQ" | "SRC" | "CON" if !value.is_empty() => warnings.push(Warning::new(
                WarningKind::Provenance,
                format!("{key}: {} {value:?} has no CERIF field; kept as provenance", entry.tag),
            )),
            _ if !entry.known => warnings.push(Warning::new(
                WarningKind::UnknownTag,
                format!("{key}: unknown tag <{}> ignored", entry.tag),
            )),
            _ => {}
        }
    }
    if !unit.descriptions.is_empty() {
        warnings.push(Warning::new(
            WarningKind::Extension,
            format!("{key}: DUG/DUE descriptions emitted as extension element orgunit.ext.descriptions"),
        ));
    }
    if unit.names.is_empty() {
        warnings.push(Warning::new(
            WarningKind::Skipped,
            format!("{key}: no DEG/DEE name; the org unit will not validate"),
        ));
    }

    if let Some(upd) = lr.first("UPD") {
        match parse_iso_date(upd) {
            Some(d) if d.earliest() > export_date.latest() => warnings.push(Warning::new(
                WarningKind::Provenance,
                format!("{key}: last update {d} is after the export date {export_date}"),
            )),
            Some(d) => warnings.push(Warning::new(
                WarningKind::Provenance,
                format!("{key}: last updated {d}"),
            )),
            None => warnings.push(Warning::new(
                WarningKind::Provenance,
                format!("{key}: unreadable UPD value {upd:?}"),
            )),
        }
    }

    let area = lr.first("TAC");
    let street = lr.first("STR");
    let town = [lr.first("PCD"), lr.first("TWN")]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join(" ");
    let address = match (street, town.is_empty()) {
        (Some(s), false) => Some(format!("{s}, {town}")),
        (Some(s), true) => Some(s.to_string()),
        (None, false) => Some(town),
        (None, true) => None,
    };
    let contact = Contact {
        telephone: prefixed(area, lr.first("TEL")),
        fax: prefixed(area, lr.first("FAX")),
        email: lr.first("EML").map(str::to_string),
        uri: lr.first("URL").map(str::to_string),
        address,
    };
    if !contact.is_empty() {
        unit.contacts.push(contact);
    }

    if let Some(head) = lr.first("HRU") {
        let (family, first, dropped) = split_person_name(head);
        if let Some(dropped) = dropped {
            warnings.push(Warning::new(
                WarningKind::DroppedText,
                format!("{key}: head name suffix {dropped:?} dropped"),
            ));
        }
        if family.is_empty() {
            warnings.push(Warning::new(
                WarningKind::Skipped,
                format!("{key}: HRU {head:?} has no family name"),
            ));
        } else {
            let mut person = Person::new(format!("{id}.HEAD"), family);
            person.first_names = first;
            unit.relations.push(Relation::new(
                key.clone(),
                RecordKey::new(RecordType::Person, person.id.clone()),
                "head",
                false,
            ));
            related.push(Record::Person(person));
        }
    }

    let mut named_stub = |what: &str, de: Option<&str>, en: Option<&str>, prefix: Option<&str>| {
        let label = de.or(en)?;
        let own = slug(label);
        if own.is_empty() {
            warnings.push(Warning::new(
                WarningKind::Skipped,
                format!("{key}: {what} name {label:?} yields no identifier; stub not generated"),
            ));
            return None;
        }
        let id = match prefix {
            Some(p) => format!("{p}.{own}"),
            None => own,
        };
        Some(stub(id, de, en))
    };
    let university = named_stub("university", lr.first("UNG"), lr.first("UNE"), None);
    let faculty = named_stub(
        "faculty",
        lr.first("FAG"),
        lr.first("FAE"),
        university.as_ref().map(|u| u.id.as_str()),
    );
    let parent_link = |target: &str| OuOuRelation {
        target: target.to_string(),
        role: "parent".into(),
    };
    match (&faculty, &university) {
        (Some(f), _) => unit.ou_relations.push(parent_link(&f.id)),
        (None, Some(u)) => unit.ou_relations.push(parent_link(&u.id)),
        (None, None) => {}
    }
    if let Some(mut f) = faculty {
        if let Some(u) = &university {
            f.ou_relations.push(parent_link(&u.id));
        }
        related.push(Record::OrgUnit(f));
    }
    if let Some(u) = university {
        related.push(Record::OrgUnit(u));
    }

    Ok(MappedRecord {
        orgunit: unit,
        related,
        warnings,
    })
}
