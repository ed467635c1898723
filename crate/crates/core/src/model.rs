//! Layer-1 CERIF domain types: projects, persons and organisation units,
//! together with the small value types they are built from.
//!
//! All types here are plain immutable values. Structural rules that cannot be
//! expressed in the type system (non-empty titles, language code shape, ...)
//! are checked by [`crate::validate::validate_record`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result, Warning, WarningKind};

/// Object type vocabulary shared by relations and exchange file names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordType {
    Project,
    Person,
    OrgUnit,
    Equipment,
    Result,
    Publication,
    Patent,
}

impl RecordType {
    pub const ALL: [RecordType; 7] = [
        RecordType::Project,
        RecordType::Person,
        RecordType::OrgUnit,
        RecordType::Equipment,
        RecordType::Result,
        RecordType::Publication,
        RecordType::Patent,
    ];

    pub fn token(self) -> &'static str {
        match self {
            RecordType::Project => "project",
            RecordType::Person => "person",
            RecordType::OrgUnit => "orgunit",
            RecordType::Equipment => "equipment",
            RecordType::Result => "result",
            RecordType::Publication => "publication",
            RecordType::Patent => "patent",
        }
    }

    /// Case-insensitive lookup of a type token.
    pub fn from_token(token: &str) -> Option<RecordType> {
        let token = token.trim();
        RecordType::ALL
            .into_iter()
            .find(|t| t.token().eq_ignore_ascii_case(token))
    }

    /// Whether this type carries a field schema (and thus can be a [`Record`]).
    pub fn is_modelled(self) -> bool {
        matches!(
            self,
            RecordType::Project | RecordType::Person | RecordType::OrgUnit
        )
    }
}

impl fmt::Display for RecordType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// `(type, id)` pair identifying one resource description.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordKey {
    pub record_type: RecordType,
    pub id: String,
}

impl RecordKey {
    pub fn new(record_type: RecordType, id: impl Into<String>) -> Self {
        RecordKey {
            record_type,
            id: id.into(),
        }
    }
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.record_type, self.id)
    }
}

impl FromStr for RecordKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (ty, id) = s
            .split_once(':')
            .ok_or_else(|| format!("expected type:id, got {s:?}"))?;
        let record_type =
            RecordType::from_token(ty).ok_or_else(|| format!("unknown record type {ty:?}"))?;
        if id.is_empty() {
            return Err(format!("empty identifier in {s:?}"));
        }
        Ok(RecordKey::new(record_type, id))
    }
}

/// A calendar date of which day, or day and month, may be unknown.
///
/// A day without a month is unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialDate {
    year: u16,
    month: Option<u8>,
    day: Option<u8>,
}

impl PartialDate {
    pub fn new(year: u16, month: Option<u8>, day: Option<u8>) -> Result<Self> {
        let shown = || format!("{day:?}.{month:?}.{year}");
        if !(1000..=9999).contains(&year) {
            return Err(Error::format(&shown(), "year must have four digits"));
        }
        if let Some(m) = month {
            if !(1..=12).contains(&m) {
                return Err(Error::format(&shown(), "month out of range 1-12"));
            }
        }
        match (day, month) {
            (Some(_), None) => Err(Error::format(&shown(), "day given without month")),
            (Some(d), Some(_)) if !(1..=31).contains(&d) => {
                Err(Error::format(&shown(), "day out of range 1-31"))
            }
            _ => Ok(PartialDate { year, month, day }),
        }
    }

    pub fn year_only(year: u16) -> Result<Self> {
        Self::new(year, None, None)
    }

    pub fn full(day: u8, month: u8, year: u16) -> Result<Self> {
        Self::new(year, Some(month), Some(day))
    }

    pub fn year(&self) -> u16 {
        self.year
    }

    pub fn month(&self) -> Option<u8> {
        self.month
    }

    pub fn day(&self) -> Option<u8> {
        self.day
    }

    pub fn is_full(&self) -> bool {
        self.day.is_some()
    }

    /// First calendar day covered by this date, as `(year, month, day)`.
    pub fn earliest(&self) -> (u16, u8, u8) {
        (self.year, self.month.unwrap_or(1), self.day.unwrap_or(1))
    }

    /// Last calendar day covered by this date (day 31 stands for month end).
    pub fn latest(&self) -> (u16, u8, u8) {
        (self.year, self.month.unwrap_or(12), self.day.unwrap_or(31))
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_partial_date(self))
    }
}

impl FromStr for PartialDate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_partial_date(s)
    }
}

/// Parses `YYYY`, `MM.YYYY` or `DD.MM.YYYY`.
///
/// Unknown parts are omitted, never zero-filled: `00.06.2000` is rejected.
pub fn parse_partial_date(text: &str) -> Result<PartialDate> {
    let trimmed = text.trim();
    let segments: Vec<&str> = trimmed.split('.').collect();
    if segments.is_empty() || segments.len() > 3 {
        return Err(Error::format(text, "expected 1 to 3 dot-separated fields"));
    }
    let mut numbers = Vec::with_capacity(segments.len());
    for seg in &segments {
        if seg.is_empty() || !seg.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::format(text, format!("non-numeric field {seg:?}")));
        }
        let value: u32 = seg
            .parse()
            .map_err(|_| Error::format(text, format!("field {seg:?} too large")))?;
        if value == 0 {
            return Err(Error::format(text, "zero field; omit unknown parts instead"));
        }
        numbers.push((seg.len(), value));
    }
    let (year_len, year) = numbers[numbers.len() - 1];
    if year_len != 4 {
        return Err(Error::format(text, "year must have four digits"));
    }
    let narrow = |(len, v): (usize, u32)| -> Result<u8> {
        if len > 2 {
            return Err(Error::format(text, "day and month take at most two digits"));
        }
        Ok(v as u8)
    };
    match numbers.len() {
        1 => PartialDate::new(year as u16, None, None),
        2 => PartialDate::new(year as u16, Some(narrow(numbers[0])?), None),
        _ => PartialDate::new(
            year as u16,
            Some(narrow(numbers[1])?),
            Some(narrow(numbers[0])?),
        ),
    }
    .map_err(|e| match e {
        Error::Format { reason, .. } => Error::format(text, reason),
        other => other,
    })
}

pub fn format_partial_date(date: &PartialDate) -> String {
    match (date.day, date.month) {
        (Some(d), Some(m)) => format!("{d:02}.{m:02}.{:04}", date.year),
        (None, Some(m)) => format!("{m:02}.{:04}", date.year),
        _ => format!("{:04}", date.year),
    }
}

/// Splits a semicolon-separated value into trimmed, non-empty items.
pub fn split_semicolon_list(text: &str) -> Vec<String> {
    text.split(';')
        .map(normalize_whitespace)
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn join_semicolon_list<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Trims both ends and collapses interior whitespace runs to one space.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TranslationType {
    Original,
    Human,
    Machine,
}

impl TranslationType {
    pub fn code(self) -> char {
        match self {
            TranslationType::Original => 'O',
            TranslationType::Human => 'H',
            TranslationType::Machine => 'M',
        }
    }
}

/// Maps a one-letter translation code to its type.
///
/// The digit `0` is read as `O` (original) and reported with a warning.
pub fn normalize_translation_code(token: &str) -> Result<(TranslationType, Option<Warning>)> {
    match token.trim() {
        "O" => Ok((TranslationType::Original, None)),
        "H" => Ok((TranslationType::Human, None)),
        "M" => Ok((TranslationType::Machine, None)),
        "0" => Ok((
            TranslationType::Original,
            Some(Warning::new(
                WarningKind::NormalizedCode,
                "translation code \"0\" read as \"O\" (original)",
            )),
        )),
        other => Err(Error::UnknownCode(other.to_string())),
    }
}

/// Language-tagged, translation-typed text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TranslatedText {
    pub language: String,
    pub translation: TranslationType,
    pub text: String,
}

impl TranslatedText {
    pub fn new(language: &str, translation: TranslationType, text: &str) -> Self {
        TranslatedText {
            language: language.trim().to_ascii_lowercase(),
            translation,
            text: normalize_whitespace(text),
        }
    }
}

/// Language code shape check: two lowercase ASCII letters.
pub fn is_language_code(code: &str) -> bool {
    code.len() == 2 && code.bytes().all(|b| b.is_ascii_lowercase())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjectStatus {
    Execution,
    Accepted,
    Completed,
    Started,
}

impl ProjectStatus {
    pub fn token(self) -> &'static str {
        match self {
            ProjectStatus::Execution => "Execution",
            ProjectStatus::Accepted => "Accepted",
            ProjectStatus::Completed => "Completed",
            ProjectStatus::Started => "Started",
        }
    }
}

impl FromStr for ProjectStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        [
            ProjectStatus::Execution,
            ProjectStatus::Accepted,
            ProjectStatus::Completed,
            ProjectStatus::Started,
        ]
        .into_iter()
        .find(|st| st.token().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown project status {s:?}"))
    }
}

/// Status assumed for a project whose source has none: a project whose end
/// lies strictly before the export date is `Completed`, anything else is
/// still in `Execution`.
pub fn default_status(end: Option<&PartialDate>, export_date: &PartialDate) -> ProjectStatus {
    match end {
        Some(end) if end.latest() < export_date.earliest() => ProjectStatus::Completed,
        _ => ProjectStatus::Execution,
    }
}

/// Directed link from the holding record to another resource.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub source: RecordKey,
    pub target: RecordKey,
    pub role: String,
    pub mandatory: bool,
}

impl Relation {
    pub fn new(source: RecordKey, target: RecordKey, role: &str, mandatory: bool) -> Self {
        Relation {
            source,
            target,
            role: normalize_whitespace(role),
            mandatory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpertSkill {
    pub role: Option<String>,
    pub skill: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Contact {
    pub telephone: Option<String>,
    pub fax: Option<String>,
    pub email: Option<String>,
    pub uri: Option<String>,
    pub address: Option<String>,
}

impl Contact {
    pub fn is_empty(&self) -> bool {
        self.telephone.is_none()
            && self.fax.is_none()
            && self.email.is_none()
            && self.uri.is_none()
            && self.address.is_none()
    }
}

/// Org-unit to org-unit link as nested in the org-unit description.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OuOuRelation {
    pub target: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Project {
    pub id: String,
    /// `None` when the source value was missing or outside the vocabulary.
    pub status: Option<ProjectStatus>,
    pub start: Option<PartialDate>,
    pub end: Option<PartialDate>,
    pub uri: Option<String>,
    pub prize_awards: Vec<String>,
    pub titles: Vec<TranslatedText>,
    pub abstracts: Vec<TranslatedText>,
    /// One entry per translation; each text stays a semicolon list.
    pub keywords: Vec<TranslatedText>,
    pub relations: Vec<Relation>,
}

impl Project {
    pub fn new(id: impl Into<String>) -> Self {
        Project {
            id: id.into(),
            status: None,
            start: None,
            end: None,
            uri: None,
            prize_awards: Vec::new(),
            titles: Vec::new(),
            abstracts: Vec::new(),
            keywords: Vec::new(),
            relations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sex {
    M,
    F,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Person {
    pub id: String,
    pub family_names: String,
    pub first_names: String,
    pub sex: Option<Sex>,
    pub prize_awards: Vec<String>,
    pub uri: Option<String>,
    pub expert_skills: Vec<ExpertSkill>,
    pub contacts: Vec<Contact>,
    pub relations: Vec<Relation>,
}

impl Person {
    pub fn new(id: impl Into<String>, family_names: impl Into<String>) -> Self {
        Person {
            id: id.into(),
            family_names: family_names.into(),
            first_names: String::new(),
            sex: None,
            prize_awards: Vec::new(),
            uri: None,
            expert_skills: Vec::new(),
            contacts: Vec::new(),
            relations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrgUnit {
    pub id: String,
    pub acronym: Option<String>,
    pub prize_award: Option<String>,
    pub url: Option<String>,
    pub names: Vec<TranslatedText>,
    /// Extension: free-text unit descriptions, shaped like project abstracts.
    pub descriptions: Vec<TranslatedText>,
    pub ou_relations: Vec<OuOuRelation>,
    pub expert_skills: Vec<ExpertSkill>,
    pub contacts: Vec<Contact>,
    pub relations: Vec<Relation>,
}

impl OrgUnit {
    pub fn new(id: impl Into<String>) -> Self {
        OrgUnit {
            id: id.into(),
            acronym: None,
            prize_award: None,
            url: None,
            names: Vec::new(),
            descriptions: Vec::new(),
            ou_relations: Vec::new(),
            expert_skills: Vec::new(),
            contacts: Vec::new(),
            relations: Vec::new(),
        }
    }
}

/// Unit of validation, serialization and exchange.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Record {
    Project(Project),
    Person(Person),
    OrgUnit(OrgUnit),
}

impl Record {
    pub fn record_type(&self) -> RecordType {
        match self {
            Record::Project(_) => RecordType::Project,
            Record::Person(_) => RecordType::Person,
            Record::OrgUnit(_) => RecordType::OrgUnit,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Record::Project(p) => &p.id,
            Record::Person(p) => &p.id,
            Record::OrgUnit(o) => &o.id,
        }
    }

    pub fn key(&self) -> RecordKey {
        RecordKey::new(self.record_type(), self.id())
    }

    pub fn relations(&self) -> &[Relation] {
        match self {
            Record::Project(p) => &p.relations,
            Record::Person(p) => &p.relations,
            Record::OrgUnit(o) => &o.relations,
        }
    }

    pub fn relations_mut(&mut self) -> &mut Vec<Relation> {
        match self {
            Record::Project(p) => &mut p.relations,
            Record::Person(p) => &mut p.relations,
            Record::OrgUnit(o) => &mut o.relations,
        }
    }

    /// Keys of every resource this record points at, nested org-unit links
    /// included.
    pub fn referenced_keys(&self) -> BTreeSet<RecordKey> {
        let mut keys: BTreeSet<RecordKey> =
            self.relations().iter().map(|r| r.target.clone()).collect();
        if let Record::OrgUnit(o) = self {
            keys.extend(
                o.ou_relations
                    .iter()
                    .map(|r| RecordKey::new(RecordType::OrgUnit, r.target.clone())),
            );
        }
        keys
    }
}

impl From<Project> for Record {
    fn from(p: Project) -> Self {
        Record::Project(p)
    }
}

impl From<Person> for Record {
    fn from(p: Person) -> Self {
        Record::Person(p)
    }
}

impl From<OrgUnit> for Record {
    fn from(o: OrgUnit) -> Self {
        Record::OrgUnit(o)
    }
}

/// One flattened field of a record, as used by the HTML rows and the triple
/// view.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldValue {
    Text(String),
    Translated(TranslatedText),
    /// A skill or similar value carrying an optional qualifier.
    Qualified { qualifier: Option<String>, text: String },
    Link {
        role: String,
        target: RecordKey,
        mandatory: bool,
    },
}

impl Record {
    /// Populated fields in schema order; list fields yield one entry per
    /// item, prize awards one joined entry.
    pub fn fields(&self) -> Vec<(&'static str, FieldValue)> {
        use FieldValue::*;
        let mut out: Vec<(&'static str, FieldValue)> = Vec::new();
        let text = |s: &str| Text(s.to_string());
        fn skills(out: &mut Vec<(&'static str, FieldValue)>, list: &[ExpertSkill]) {
            for s in list {
                out.push((
                    "expert_skill",
                    Qualified {
                        qualifier: s.role.clone(),
                        text: s.skill.clone(),
                    },
                ));
            }
        }
        fn contacts(out: &mut Vec<(&'static str, FieldValue)>, list: &[Contact]) {
            for c in list {
                for (name, v) in [
                    ("contact.telephone", &c.telephone),
                    ("contact.fax", &c.fax),
                    ("contact.email", &c.email),
                    ("contact.uri", &c.uri),
                    ("contact.address", &c.address),
                ] {
                    if let Some(v) = v {
                        out.push((name, Text(v.clone())));
                    }
                }
            }
        }
        match self {
            Record::Project(p) => {
                if let Some(s) = p.status {
                    out.push(("proj_status", text(s.token())));
                }
                if let Some(d) = &p.start {
                    out.push(("proj_startdate", Text(d.to_string())));
                }
                if let Some(d) = &p.end {
                    out.push(("proj_enddate", Text(d.to_string())));
                }
                if let Some(u) = &p.uri {
                    out.push(("proj_uri", text(u)));
                }
                if !p.prize_awards.is_empty() {
                    out.push(("proj_prizeaward", Text(join_semicolon_list(&p.prize_awards))));
                }
                out.extend(p.titles.iter().map(|t| ("proj_title", Translated(t.clone()))));
                out.extend(p.abstracts.iter().map(|t| ("proj_abstract", Translated(t.clone()))));
                out.extend(p.keywords.iter().map(|t| ("proj_keywords", Translated(t.clone()))));
            }
            Record::Person(p) => {
                out.push(("per_family_names", text(&p.family_names)));
                if !p.first_names.is_empty() {
                    out.push(("per_first_names", text(&p.first_names)));
                }
                if let Some(sex) = p.sex {
                    out.push(("per_sex", text(if sex == Sex::M { "M" } else { "F" })));
                }
                if !p.prize_awards.is_empty() {
                    out.push(("per_prize_awards", Text(join_semicolon_list(&p.prize_awards))));
                }
                if let Some(u) = &p.uri {
                    out.push(("per_uri", text(u)));
                }
                skills(&mut out, &p.expert_skills);
                contacts(&mut out, &p.contacts);
            }
            Record::OrgUnit(o) => {
                if let Some(a) = &o.acronym {
                    out.push(("org_acronym", text(a)));
                }
                if let Some(a) = &o.prize_award {
                    out.push(("org_prizeaward", text(a)));
                }
                if let Some(u) = &o.url {
                    out.push(("org_url", text(u)));
                }
                out.extend(o.names.iter().map(|t| ("orgunit_name", Translated(t.clone()))));
                out.extend(
                    o.descriptions
                        .iter()
                        .map(|t| ("orgunit_description", Translated(t.clone()))),
                );
                for r in &o.ou_relations {
                    out.push((
                        "ou_ou_relation",
                        Link {
                            role: r.role.clone(),
                            target: RecordKey::new(RecordType::OrgUnit, r.target.clone()),
                            mandatory: false,
                        },
                    ));
                }
                skills(&mut out, &o.expert_skills);
                contacts(&mut out, &o.contacts);
            }
        }
        for r in self.relations() {
            out.push((
                "relation",
                Link {
                    role: r.role.clone(),
                    target: r.target.clone(),
                    mandatory: r.mandatory,
                },
            ));
        }
        out
    }
}

/// Soft checks that never cause a discard.
///
/// `known_languages`, when given, is the accepted ISO 639 code list; without
/// it only the code shape is enforced (by the validator, not here).
pub fn lint_record(record: &Record, known_languages: Option<&BTreeSet<String>>) -> Vec<Warning> {
    let mut out = Vec::new();
    let key = record.key();
    if let Record::Project(p) = record {
        if let (Some(start), Some(end)) = (&p.start, &p.end) {
            if start.earliest() > end.latest() {
                out.push(Warning::new(
                    WarningKind::Lint,
                    format!("{key}: start date {start} is after end date {end}"),
                ));
            }
        }
    }
    if let Some(known) = known_languages {
        let texts: Vec<&TranslatedText> = match record {
            Record::Project(p) => p
                .titles
                .iter()
                .chain(&p.abstracts)
                .chain(&p.keywords)
                .collect(),
            Record::OrgUnit(o) => o.names.iter().chain(&o.descriptions).collect(),
            Record::Person(_) => Vec::new(),
        };
        for t in texts {
            if !known.contains(&t.language) {
                out.push(Warning::new(
                    WarningKind::Lint,
                    format!("{key}: language {:?} is not in the ISO 639 list", t.language),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_year_date() {
        let d = parse_partial_date("02.2000").unwrap();
        assert_eq!((d.year(), d.month(), d.day()), (2000, Some(2), None));
    }

    #[test]
    fn zero_day_rejected() {
        assert!(matches!(
            parse_partial_date("00.06.2000"),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn full_date() {
        let d = parse_partial_date("31.12.2001").unwrap();
        assert_eq!((d.year(), d.month(), d.day()), (2001, Some(12), Some(31)));
    }

    #[test]
    fn bad_dates() {
        for bad in [
            "", "2000.", "1.2.3.2000", "13.2000", "32.01.2000", "ab.2000", "200", "02.20000",
            "001.01.2000", "0.2000",
        ] {
            assert!(parse_partial_date(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn date_formatting() {
        let d = PartialDate::new(2001, Some(12), None).unwrap();
        assert_eq!(format_partial_date(&d), "12.2001");
        assert_eq!(format_partial_date(&PartialDate::year_only(2001).unwrap()), "2001");
        assert_eq!(
            format_partial_date(&PartialDate::full(6, 6, 2001).unwrap()),
            "06.06.2001"
        );
    }

    #[test]
    fn day_without_month_unrepresentable() {
        assert!(PartialDate::new(2001, None, Some(3)).is_err());
    }

    #[test]
    fn semicolon_lists() {
        assert_eq!(
            split_semicolon_list("Prize 1 name; award 1 name; prize 2 name; prize 3 name").len(),
            4
        );
        assert!(split_semicolon_list("").is_empty());
        assert_eq!(
            split_semicolon_list("multimedia; software; research information system"),
            vec!["multimedia", "software", "research information system"]
        );
        assert_eq!(split_semicolon_list(" a ;; ;b"), vec!["a", "b"]);
    }

    #[test]
    fn translation_codes() {
        assert_eq!(
            normalize_translation_code("H").unwrap(),
            (TranslationType::Human, None)
        );
        let (t, w) = normalize_translation_code("0").unwrap();
        assert_eq!(t, TranslationType::Original);
        assert_eq!(w.unwrap().kind, WarningKind::NormalizedCode);
        assert!(matches!(
            normalize_translation_code("X"),
            Err(Error::UnknownCode(_))
        ));
    }

    #[test]
    fn status_default_rule() {
        let export = PartialDate::full(6, 6, 2001).unwrap();
        let ended = PartialDate::new(2001, Some(5), None).unwrap();
        let same_month = PartialDate::new(2001, Some(6), None).unwrap();
        assert_eq!(default_status(Some(&ended), &export), ProjectStatus::Completed);
        assert_eq!(default_status(Some(&same_month), &export), ProjectStatus::Execution);
        assert_eq!(default_status(None, &export), ProjectStatus::Execution);
    }

    #[test]
    fn start_after_end_is_a_lint() {
        let mut p = Project::new("P1");
        p.start = Some(PartialDate::new(2002, Some(1), None).unwrap());
        p.end = Some(PartialDate::new(2001, Some(12), None).unwrap());
        let lints = lint_record(&Record::Project(p.clone()), None);
        assert_eq!(lints.len(), 1);
        p.end = Some(PartialDate::year_only(2002).unwrap());
        assert!(lint_record(&Record::Project(p), None).is_empty());
    }

    #[test]
    fn language_list_lint() {
        let known: BTreeSet<String> = ["en", "de"].iter().map(|s| s.to_string()).collect();
        let mut o = OrgUnit::new("X");
        o.names.push(TranslatedText::new("zz", TranslationType::Original, "Name"));
        assert_eq!(lint_record(&Record::OrgUnit(o), Some(&known)).len(), 1);
    }

    #[test]
    fn record_key_text() {
        let k: RecordKey = "orgunit:TUWIEN.AUSENINSTITUT".parse().unwrap();
        assert_eq!(k, RecordKey::new(RecordType::OrgUnit, "TUWIEN.AUSENINSTITUT"));
        assert_eq!(k.to_string(), "orgunit:TUWIEN.AUSENINSTITUT");
        assert!("nothing".parse::<RecordKey>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn valid_date() -> impl Strategy<Value = PartialDate> {
            (1000u16..=9999, prop::option::of(1u8..=12), prop::option::of(1u8..=31)).prop_map(
                |(y, m, d)| PartialDate::new(y, m, m.and(d)).unwrap(),
            )
        }

        proptest! {
            #[test]
            fn date_round_trip(d in valid_date()) {
                prop_assert_eq!(parse_partial_date(&format_partial_date(&d)).unwrap(), d);
            }

            #[test]
            fn semicolon_split_join_idempotent(items in prop::collection::vec("[a-z ;]{0,12}", 0..6)) {
                let text = items.join(";");
                let once = split_semicolon_list(&text);
                let twice = split_semicolon_list(&join_semicolon_list(&once));
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn translation_code_idempotent() {
            for t in [TranslationType::Original, TranslationType::Human, TranslationType::Machine] {
                let (again, w) = normalize_translation_code(&t.code().to_string()).unwrap();
                assert_eq!(again, t);
                assert!(w.is_none());
            }
        }
    }
}
