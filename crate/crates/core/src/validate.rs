//! Mandatory-field rules and cascade discard.
//!
//! A record missing a mandatory field is discarded. A record holding a
//! relation flagged mandatory whose target was discarded is discarded too,
//! transitively. References to records outside the set are only reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Warning, WarningKind};
use crate::model::{
    is_language_code, normalize_whitespace, Contact, ExpertSkill, Record, RecordKey, Relation,
    TranslatedText,
};
use crate::rdf::RecordSet;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    MissingMandatoryField(&'static str),
    InvalidValue { field: &'static str, reason: String },
    DuplicateId { key: RecordKey, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingMandatoryField(field) => write!(f, "missing-mandatory-field:{field}"),
            Violation::InvalidValue { field, reason } => write!(f, "invalid-value:{field}: {reason}"),
            Violation::DuplicateId { key, count } => write!(f, "duplicate-id:{key} ({count} times)"),
        }
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn invalid(&mut self, field: &'static str, reason: impl Into<String>) {
        self.out.push(Violation::InvalidValue {
            field,
            reason: reason.into(),
        });
    }

    fn id(&mut self, id: &str) {
        if id.is_empty() {
            self.out.push(Violation::MissingMandatoryField("id"));
        } else if id.trim() != id {
            self.invalid("id", format!("{id:?} has surrounding whitespace"));
        }
    }

    /// Literal values are stored whitespace-normalized; an empty string
    /// counts as absent.
    fn literal(&mut self, field: &'static str, value: &str) {
        if value.is_empty() {
            self.invalid(field, "empty value");
        } else if normalize_whitespace(value) != value {
            self.invalid(field, format!("{value:?} is not whitespace-normalized"));
        }
    }

    fn opt_literal(&mut self, field: &'static str, value: Option<&String>) {
        if let Some(v) = value {
            self.literal(field, v);
        }
    }

    fn list_items(&mut self, field: &'static str, items: &[String]) {
        for item in items {
            self.literal(field, item);
            if item.contains(';') {
                self.invalid(field, format!("item {item:?} contains ';'"));
            }
        }
    }

    fn texts(&mut self, field: &'static str, texts: &[TranslatedText], mandatory: bool) {
        if mandatory && texts.is_empty() {
            self.out.push(Violation::MissingMandatoryField(field));
        }
        for t in texts {
            if !is_language_code(&t.language) {
                self.invalid(field, format!("language {:?} is not a two-letter code", t.language));
            }
            self.literal(field, &t.text);
        }
    }

    fn skills(&mut self, skills: &[ExpertSkill]) {
        for s in skills {
            self.literal("expert_skills", &s.skill);
            self.opt_literal("expert_skills", s.role.as_ref());
        }
    }

    fn contacts(&mut self, contacts: &[Contact]) {
        for c in contacts {
            if c.is_empty() {
                self.invalid("contacts", "contact has no field");
            }
            for v in [&c.telephone, &c.fax, &c.email, &c.uri, &c.address] {
                self.opt_literal("contacts", v.as_ref());
            }
        }
    }

    fn relations(&mut self, own: &RecordKey, relations: &[Relation]) {
        for r in relations {
            if r.source != *own {
                self.invalid(
                    "relations",
                    format!("relation held by {own} has source {}", r.source),
                );
            }
            self.out.extend(validate_relation(r));
        }
    }
}

/// Every missing mandatory field and invariant breach of one record.
/// An empty result means the record is individually valid.
pub fn validate_record(record: &Record) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    let key = record.key();
    c.id(record.id());
    match record {
        Record::Project(p) => {
            if p.status.is_none() {
                c.out.push(Violation::MissingMandatoryField("status"));
            }
            c.opt_literal("uri", p.uri.as_ref());
            c.list_items("prize_awards", &p.prize_awards);
            c.texts("titles", &p.titles, true);
            c.texts("abstracts", &p.abstracts, true);
            c.texts("keywords", &p.keywords, false);
        }
        Record::Person(p) => {
            if p.family_names.is_empty() {
                c.out.push(Violation::MissingMandatoryField("family_names"));
            } else {
                c.literal("family_names", &p.family_names);
            }
            if !p.first_names.is_empty() {
                c.literal("first_names", &p.first_names);
            }
            c.list_items("prize_awards", &p.prize_awards);
            c.opt_literal("uri", p.uri.as_ref());
            c.skills(&p.expert_skills);
            c.contacts(&p.contacts);
        }
        Record::OrgUnit(o) => {
            c.opt_literal("acronym", o.acronym.as_ref());
            c.opt_literal("prize_award", o.prize_award.as_ref());
            c.opt_literal("url", o.url.as_ref());
            c.texts("names", &o.names, true);
            c.texts("descriptions", &o.descriptions, false);
            for r in &o.ou_relations {
                if r.target.is_empty() || r.target.trim() != r.target {
                    c.invalid("ou_relations", format!("bad target {:?}", r.target));
                }
                if r.role.is_empty() {
                    c.invalid("ou_relations", "empty role");
                } else {
                    c.literal("ou_relations", &r.role);
                }
            }
            c.skills(&o.expert_skills);
            c.contacts(&o.contacts);
        }
    }
    c.relations(&key, record.relations());
    c.out
}

pub fn validate_relation(r: &Relation) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    if r.source == r.target {
        c.invalid("relations", format!("relation from {} to itself", r.source));
    }
    for end in [&r.source, &r.target] {
        if end.id.is_empty() || end.id.trim() != end.id {
            c.invalid("relations", format!("bad endpoint id {:?}", end.id));
        }
    }
    if !r.role.is_empty() {
        c.literal("relations", &r.role);
    }
    c.out
}

/// Why a record was left out of the kept set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiscardReason {
    Invalid(Vec<Violation>),
    CascadeFrom(RecordKey),
}

impl fmt::Display for DiscardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscardReason::Invalid(vs) => {
                let parts: Vec<String> = vs.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(", "))
            }
            DiscardReason::CascadeFrom(key) => write!(f, "cascade-from:{key}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscardReport {
    pub kept: RecordSet,
    /// In key order.
    pub discarded: Vec<(RecordKey, DiscardReason)>,
    pub warnings: Vec<Warning>,
}

impl DiscardReport {
    pub fn is_clean(&self) -> bool {
        self.discarded.is_empty()
    }

    pub fn discarded_keys(&self) -> BTreeSet<RecordKey> {
        self.discarded.iter().map(|(k, _)| k.clone()).collect()
    }

    /// One `DISCARD <type> <id> <reason>` line per discarded record.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (key, reason) in &self.discarded {
            out.push_str(&format!("DISCARD {} {} {reason}\n", key.record_type, key.id));
        }
        out
    }
}

/// Computes the least set of records to discard.
///
/// Seeds are records with violations. Discards then spread in rounds along
/// mandatory relations, from target back to holder; a cascaded record names
/// the smallest already-discarded target as its cause.
pub fn apply_discard_cascade(rs: &RecordSet) -> DiscardReport {
    let mut discarded: BTreeMap<RecordKey, DiscardReason> = BTreeMap::new();
    for (key, record) in &rs.records {
        let violations = validate_record(record);
        if !violations.is_empty() {
            discarded.insert(key.clone(), DiscardReason::Invalid(violations));
        }
    }

    // target -> holders depending on it
    let mut dependents: BTreeMap<&RecordKey, Vec<&RecordKey>> = BTreeMap::new();
    for (key, record) in &rs.records {
        for rel in record.relations().iter().filter(|r| r.mandatory) {
            dependents.entry(&rel.target).or_default().push(key);
        }
    }

    let mut frontier: BTreeSet<RecordKey> = discarded.keys().cloned().collect();
    while !frontier.is_empty() {
        let mut next: BTreeMap<RecordKey, RecordKey> = BTreeMap::new();
        for target in &frontier {
            for holder in dependents.get(target).into_iter().flatten() {
                if discarded.contains_key(*holder) {
                    continue;
                }
                next.entry((*holder).clone())
                    .and_modify(|cause| {
                        if target < cause {
                            *cause = target.clone();
                        }
                    })
                    .or_insert_with(|| target.clone());
            }
        }
        frontier = next.keys().cloned().collect();
        for (holder, cause) in next {
            discarded.insert(holder, DiscardReason::CascadeFrom(cause));
        }
    }

    let mut warnings = Vec::new();
    for (key, record) in &rs.records {
        for target in record.referenced_keys() {
            if !rs.records.contains_key(&target) {
                warnings.push(Warning::new(
                    WarningKind::DanglingReference,
                    format!("{key} refers to {target}, which is not in this document"),
                ));
            }
        }
    }

    let mut kept = RecordSet {
        records: BTreeMap::new(),
        external_relations: rs.external_relations.clone(),
        declared_namespaces: rs.declared_namespaces.clone(),
    };
    for (key, record) in &rs.records {
        if !discarded.contains_key(key) {
            kept.records.insert(key.clone(), record.clone());
        }
    }
    DiscardReport {
        kept,
        discarded: discarded.into_iter().collect(),
        warnings,
    }
}

/// Reports every `(type, id)` occurring more than once among typed nodes.
pub fn check_document_uniqueness(keys: &[RecordKey]) -> Vec<Violation> {
    let mut counts: BTreeMap<&RecordKey, usize> = BTreeMap::new();
    for key in keys {
        *counts.entry(key).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(key, count)| Violation::DuplicateId {
            key: key.clone(),
            count,
        })
        .collect()
}
