//! Reader and writer for the CERIF-RDF dialect of RDF/XML.
//!
//! The dialect is small: an `rdf:RDF` root holding typed nodes
//! (`cerif:project`, `cerif:person`, `cerif:orgunit`) identified by an `ID`
//! attribute, literal property elements, `rdf:Bag`/`rdf:li` containers and
//! `resource="..."` references. Two element naming families are in
//! circulation (`cerif:proj_status` and `cerif:project.Status`); both are
//! read through [`resolve_alias`], and output always uses the first.
//!
//! Input tag order is free. Output is canonical: records sorted by key,
//! properties in schema order, two-space indentation.

use std::collections::{BTreeMap, BTreeSet};

use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use crate::error::{Error, Result, Warning, WarningKind};
use crate::model::{
    format_partial_date, join_semicolon_list, normalize_translation_code, normalize_whitespace,
    parse_partial_date, split_semicolon_list, Contact, ExpertSkill, OrgUnit, OuOuRelation,
    Person, Project, ProjectStatus, Record, RecordKey, RecordType, Relation, Sex,
    TranslatedText,
};
use crate::validate;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const CERIF_NS: &str = "http://derpi.tuwien.ac.at/~andrei/cerif-rdf#";

/// Environment variable overriding the CERIF namespace URI.
pub const CERIF_NS_ENV: &str = "CERIF_RDF_NS";

/// Records of one RDF document, keyed by `(type, id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordSet {
    pub records: BTreeMap<RecordKey, Record>,
    /// Relations whose holding record is described elsewhere.
    pub external_relations: BTreeSet<Relation>,
    pub declared_namespaces: BTreeMap<String, String>,
}

impl Default for RecordSet {
    fn default() -> Self {
        Self::new()
    }
}

impl RecordSet {
    /// Empty set declaring the `rdf`, `rdfs` and `cerif` prefixes.
    pub fn new() -> Self {
        let declared_namespaces = [("rdf", RDF_NS), ("rdfs", RDFS_NS), ("cerif", CERIF_NS)]
            .into_iter()
            .map(|(p, u)| (p.to_string(), u.to_string()))
            .collect();
        RecordSet {
            records: BTreeMap::new(),
            external_relations: BTreeSet::new(),
            declared_namespaces,
        }
    }

    pub fn from_records(records: impl IntoIterator<Item = Record>) -> Result<Self> {
        let mut rs = RecordSet::new();
        for r in records {
            rs.insert(r)?;
        }
        Ok(rs)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty() && self.external_relations.is_empty()
    }

    pub fn get(&self, key: &RecordKey) -> Option<&Record> {
        self.records.get(key)
    }

    /// Adds a record; a second description under the same key is an error.
    pub fn insert(&mut self, record: Record) -> Result<()> {
        let key = record.key();
        if self.records.contains_key(&key) {
            return Err(Error::DuplicateId(key));
        }
        self.records.insert(key, record);
        Ok(())
    }

    /// Files a relation under its holding record if present, otherwise as an
    /// external relation. Exact duplicates are dropped.
    pub fn add_relation(&mut self, relation: Relation) {
        match self.records.get_mut(&relation.source) {
            Some(holder) => {
                if !holder.relations().contains(&relation) {
                    holder.relations_mut().push(relation);
                }
            }
            None => {
                self.external_relations.insert(relation);
            }
        }
    }

    /// Every relation in the set, held or external.
    pub fn all_relations(&self) -> impl Iterator<Item = &Relation> {
        self.records
            .values()
            .flat_map(|r| r.relations().iter())
            .chain(self.external_relations.iter())
    }

    pub fn contains_relation(&self, relation: &Relation) -> bool {
        self.all_relations().any(|r| r == relation)
    }
}

/// Codec settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecOptions {
    pub cerif_ns: String,
}

impl Default for CodecOptions {
    fn default() -> Self {
        CodecOptions {
            cerif_ns: CERIF_NS.to_string(),
        }
    }
}

impl CodecOptions {
    /// Defaults, with the CERIF namespace taken from `CERIF_RDF_NS` if set.
    pub fn from_env() -> Self {
        match std::env::var(CERIF_NS_ENV) {
            Ok(ns) if !ns.trim().is_empty() => CodecOptions {
                cerif_ns: ns.trim().to_string(),
            },
            _ => CodecOptions::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// Element names
// ---------------------------------------------------------------------------

/// One row of the alias table: the canonical spelling and every accepted one.
#[derive(Debug, Clone, Copy)]
pub struct ElementAlias {
    pub canonical: &'static str,
    pub accepted: &'static [&'static str],
}

macro_rules! aliases {
    ($($canonical:literal => [$($alt:literal),* $(,)?]),* $(,)?) => {
        &[$(ElementAlias { canonical: $canonical, accepted: &[$canonical, $($alt),*] }),*]
    };
}

pub static ALIAS_TABLE: &[ElementAlias] = aliases! {
    "project" => ["project.project"],
    "person" => ["person.person"],
    "orgunit" => ["orgunit.orgunit"],
    "relation" => [],
    "proj_status" => ["project.Status", "project.status"],
    "proj_startdate" => ["proj_start_date", "project.StartDate", "project.startdate"],
    "proj_enddate" => ["proj_end_date", "project.EndDate", "project.enddate"],
    "proj_uri" => ["proj_url", "project.URI", "project.uri", "project.url"],
    "proj_prizeaward" => ["proj_prize_award", "proj_prizeawards", "project.PrizeAwards",
        "project.prizeawards"],
    "project-titles" => ["project.project-titles", "project_titles"],
    "Project-title" => ["project-title", "project.project-title"],
    "proj_title_language" => ["proj_title_lang"],
    "proj_title_trans_type" => ["proj_title_transl_type", "proj_title_translation"],
    "proj_title" => ["project.title"],
    "project-abstracts" => ["project.project-abstracts", "project_abstracts"],
    "Project-abstract" => ["project-abstract", "project.project-abstract"],
    "proj_abs_language" => ["proj_abs_lang"],
    "proj_abs_trans_type" => ["proj_abs_transl_type", "proj_abs_translation"],
    "proj_abstract" => ["proj-abstract", "project.abstract"],
    "project-keywords" => ["project.project-keywords", "project_keywords"],
    "Project-keyword" => ["project-keyword", "project.project-keyword"],
    "proj_kw_language" => ["proj_keywords_language"],
    "proj_kw_trans_type" => ["proj_kw_transl_type", "proj_keywords_trans_type"],
    "proj_keywords" => ["project.keywords", "keywords"],
    "lang" => ["project.lang", "language"],
    "translation" => ["project.translation", "trans_type"],
    "relations" => ["project.relations", "person.relations", "orgunit.relations"],
    "rel.role" => ["relation.role"],
    "rel.mandatory" => ["relation.mandatory"],
    "person.per_family_names" => ["per_family_names", "person.family_names"],
    "person.per_first_names" => ["per_first_names", "person.first_names"],
    "person.per_sex" => ["per_sex", "person.sex"],
    "person.per_prize_awards" => ["per_prize_awards", "person.prize_awards",
        "person.per_prizeaward"],
    "person.per_uri" => ["per_uri", "person.uri", "person.per_url"],
    "person.expert_skills" => [],
    "person.expert_skill" => [],
    "person.es.role" => [],
    "person.es.id" => ["person.es.skill"],
    "person.contacts" => [],
    "orgunit.contacts" => [],
    "contact" => ["person.contact", "orgunit.contact"],
    "contact.telephone" => ["contact.phone"],
    "contact.fax" => [],
    "contact.email" => ["contact.e-mail"],
    "contact.uri" => ["contact.url"],
    "contact.address" => [],
    "orgunit.org_acronym" => ["orgunit.acronym"],
    "orgunit.org_prizeaward" => ["orgunit.org_prize_award", "orgunit.prizeaward"],
    "orgunit.org_url" => ["orgunit.org_uri", "orgunit.url"],
    "orgunit.orgunit_names" => [],
    "orgunit.orgunit_name" => [],
    "orgunit.oun.language" => ["orgunit.oun.lang"],
    "orgunit.oun.translation" => ["orgunit.oun.trans_type"],
    "orgunit.oun.name" => [],
    "orgunit.ext.descriptions" => [],
    "orgunit.ext.description" => [],
    "orgunit.oud.language" => [],
    "orgunit.oud.translation" => [],
    "orgunit.oud.text" => [],
    "orgunit.ou_ou_relations" => [],
    "orgunit.ou_ou_relation" => [],
    "orgunit.ou_ou_r.orgunit" => [],
    "orgunit.ou_ou_r.role" => [],
    "orgunit.expert_skills" => [],
    "orgunit.expert_skill" => [],
    "orgunit.es.role" => [],
    "orgunit.es.skill" => ["orgunit.es.id"],
};

const REL_TARGET_PREFIX: &str = "rel.target.";
const REL_SOURCE_PREFIX: &str = "rel.source.";

/// Result of looking an element name up in the alias table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedName {
    pub canonical: String,
    /// False when the name is not in the table; `canonical` is then the input.
    pub known: bool,
}

/// Maps any accepted spelling of a CERIF element (local part, without the
/// `cerif:` prefix) to its canonical spelling.
pub fn resolve_alias(element_name: &str) -> ResolvedName {
    let name = element_name.strip_prefix("cerif:").unwrap_or(element_name);
    for row in ALIAS_TABLE {
        if row.accepted.contains(&name) {
            return ResolvedName {
                canonical: row.canonical.to_string(),
                known: true,
            };
        }
    }
    for prefix in [REL_TARGET_PREFIX, REL_SOURCE_PREFIX] {
        if let Some(ty) = name.strip_prefix(prefix) {
            if let Some(ty) = RecordType::from_token(ty) {
                return ResolvedName {
                    canonical: format!("{prefix}{}", ty.token()),
                    known: true,
                };
            }
        }
    }
    ResolvedName {
        canonical: name.to_string(),
        known: false,
    }
}

// ---------------------------------------------------------------------------
// Minimal element tree
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct Element {
    prefix: Option<String>,
    local: String,
    ns: Option<String>,
    attrs: Vec<(String, String)>,
    children: Vec<Node>,
}

#[derive(Debug)]
enum Node {
    Element(Element),
    Text(String),
}

impl Element {
    fn qname(&self) -> String {
        match &self.prefix {
            Some(p) => format!("{p}:{}", self.local),
            None => self.local.clone(),
        }
    }

    fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|c| match c {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    /// Direct text content, whitespace-normalized; `None` when blank.
    fn literal(&self) -> Option<String> {
        let mut raw = String::new();
        for c in &self.children {
            if let Node::Text(t) = c {
                raw.push_str(t);
            }
        }
        let text = normalize_whitespace(&raw);
        (!text.is_empty()).then_some(text)
    }

    fn attr(&self, names: &[&str]) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| names.contains(&k.as_str()))
            .map(|(_, v)| v.as_str())
    }

    fn is_rdf(&self, local: &str) -> bool {
        self.local == local
            && (self.ns.as_deref() == Some(RDF_NS) || self.prefix.as_deref() == Some("rdf"))
    }
}

type Scope = Vec<(Option<String>, String)>;

fn split_qname(raw: &str) -> (Option<String>, String) {
    match raw.split_once(':') {
        Some((p, l)) => (Some(p.to_string()), l.to_string()),
        None => (None, raw.to_string()),
    }
}

fn open_element(start: &BytesStart<'_>, scopes: &mut Vec<Scope>) -> Result<Element> {
    let raw_name = start.name().as_ref().to_string();
    let mut attrs = Vec::new();
    let mut scope = Scope::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| Error::Xml(e.to_string()))?;
        let key = attr.key.as_ref().to_string();
        let value = attr
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(|e| Error::Xml(e.to_string()))?
            .into_owned();
        if key == "xmlns" {
            scope.push((None, value.clone()));
        } else if let Some(p) = key.strip_prefix("xmlns:") {
            scope.push((Some(p.to_string()), value.clone()));
        }
        attrs.push((key, value));
    }
    scopes.push(scope);
    let (prefix, local) = split_qname(&raw_name);
    let ns = scopes
        .iter()
        .rev()
        .flat_map(|s| s.iter().rev())
        .find(|(p, _)| *p == prefix)
        .map(|(_, uri)| uri.clone());
    Ok(Element {
        prefix,
        local,
        ns,
        attrs,
        children: Vec::new(),
    })
}

fn push_text(stack: &mut [Element], text: &str) {
    if let Some(top) = stack.last_mut() {
        match top.children.last_mut() {
            Some(Node::Text(t)) => t.push_str(text),
            _ => top.children.push(Node::Text(text.to_string())),
        }
    }
}

fn build_tree(text: &str) -> Result<Element> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<Element> = Vec::new();
    let mut scopes: Vec<Scope> = Vec::new();
    let mut root: Option<Element> = None;
    let xml_err = |reader: &Reader<&[u8]>, e: quick_xml::Error| {
        Error::Xml(format!("{e} (at byte {})", reader.error_position()))
    };
    loop {
        let event = reader.read_event().map_err(|e| xml_err(&reader, e))?;
        match event {
            Event::Start(start) => {
                if root.is_some() {
                    return Err(Error::Xml("content after the root element".into()));
                }
                let el = open_element(&start, &mut scopes)?;
                stack.push(el);
            }
            Event::Empty(start) => {
                if root.is_some() {
                    return Err(Error::Xml("content after the root element".into()));
                }
                let el = open_element(&start, &mut scopes)?;
                scopes.pop();
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::End(_) => {
                scopes.pop();
                let el = stack
                    .pop()
                    .ok_or_else(|| Error::Xml("unbalanced end tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let content = t.xml10_content();
                if stack.is_empty() {
                    if !content.trim().is_empty() {
                        return Err(Error::Xml("text outside the root element".into()));
                    }
                } else {
                    push_text(&mut stack, &content);
                }
            }
            Event::CData(c) => {
                let content = c.into_inner().into_owned();
                push_text(&mut stack, &content);
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(ch)) => ch.to_string(),
                    Ok(None) => resolve_predefined_entity(&r)
                        .ok_or_else(|| Error::Xml(format!("unknown entity &{};", &*r)))?
                        .to_string(),
                    Err(e) => return Err(Error::Xml(e.to_string())),
                };
                push_text(&mut stack, &resolved);
            }
            Event::Eof => break,
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
    if let Some(open) = stack.last() {
        return Err(Error::Xml(format!("unclosed element <{}>", open.qname())));
    }
    root.ok_or_else(|| Error::Xml("document has no root element".into()))
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Ctx<'a> {
    opts: &'a CodecOptions,
    warnings: Vec<Warning>,
    assumed_ns_reported: bool,
}

impl Ctx<'_> {
    fn warn(&mut self, kind: WarningKind, message: impl Into<String>) {
        self.warnings.push(Warning::new(kind, message));
    }

    /// Local CERIF name of `el`, or `None` if it is not in the CERIF vocabulary.
    fn cerif_local(&mut self, el: &Element) -> Option<String> {
        if el.ns.as_deref() == Some(self.opts.cerif_ns.as_str()) {
            return Some(el.local.clone());
        }
        if el.prefix.as_deref() == Some("cerif") {
            if !self.assumed_ns_reported {
                self.assumed_ns_reported = true;
                let msg = match &el.ns {
                    None => format!(
                        "prefix \"cerif\" is not declared; assuming {}",
                        self.opts.cerif_ns
                    ),
                    Some(other) => format!(
                        "prefix \"cerif\" is bound to {other}; reading it as {}",
                        self.opts.cerif_ns
                    ),
                };
                self.warn(WarningKind::AssumedNamespace, msg);
            }
            return Some(el.local.clone());
        }
        if el.prefix.is_none() {
            if let Some(rest) = el.local.strip_prefix("cerif.") {
                self.warn(
                    WarningKind::AssumedNamespace,
                    format!("element <{}> read as <cerif:{rest}>", el.local),
                );
                return Some(rest.to_string());
            }
        }
        None
    }

    /// Canonical CERIF name of `el`; unknown names produce a warning.
    fn canonical(&mut self, el: &Element) -> Option<String> {
        let local = self.cerif_local(el)?;
        Some(resolve_alias(&local).canonical)
    }

    fn unknown(&mut self, el: &Element, context: &str) {
        self.warn(
            WarningKind::UnknownElement,
            format!("{context}: element <{}> ignored", el.qname()),
        );
    }

    /// Items of a container property: the element children of each `rdf:li`
    /// of its `rdf:Bag`. Bare element children are accepted as items too.
    fn bag_items<'e>(&mut self, container: &'e Element, context: &str) -> Vec<&'e Element> {
        let mut items = Vec::new();
        for child in container.elements() {
            if child.is_rdf("Bag") {
                for li in child.elements() {
                    if !li.is_rdf("li") {
                        self.unknown(li, context);
                        continue;
                    }
                    let mut inner = li.elements();
                    match inner.next() {
                        Some(item) => {
                            items.push(item);
                            for extra in inner {
                                self.unknown(extra, context);
                            }
                        }
                        None => self.warn(
                            WarningKind::EmptyListItem,
                            format!("{context}: empty rdf:li dropped"),
                        ),
                    }
                }
            } else if child.ns.as_deref() == Some(RDF_NS) || child.prefix.as_deref() == Some("rdf")
            {
                self.warn(
                    WarningKind::UnsupportedNode,
                    format!("{context}: container <{}> is not supported", child.qname()),
                );
            } else {
                items.push(child);
            }
        }
        items
    }

    fn translated_texts(&mut self, container: &Element, item_name: &str, context: &str) -> Vec<TranslatedText> {
        let mut out = Vec::new();
        for item in self.bag_items(container, context) {
            match self.canonical(item) {
                Some(name) if name == item_name => {}
                _ => {
                    self.unknown(item, context);
                    continue;
                }
            }
            let mut language = None;
            let mut translation = None;
            let mut text = None;
            for part in item.elements() {
                let Some(name) = self.canonical(part) else {
                    self.unknown(part, context);
                    continue;
                };
                match text_role(&name) {
                    Some(TextRole::Language) => language = part.literal(),
                    Some(TextRole::Translation) => translation = part.literal(),
                    Some(TextRole::Text) => text = part.literal(),
                    None => self.unknown(part, context),
                }
            }
            let (Some(language), Some(code), Some(text)) = (language, translation, text) else {
                self.warn(
                    WarningKind::EmptyListItem,
                    format!("{context}: incomplete <{}> dropped", item.qname()),
                );
                continue;
            };
            match normalize_translation_code(&code) {
                Ok((tt, warning)) => {
                    if let Some(w) = warning {
                        self.warn(w.kind, format!("{context}: {}", w.message));
                    }
                    out.push(TranslatedText::new(&language, tt, &text));
                }
                Err(e) => self.warn(
                    WarningKind::EmptyListItem,
                    format!("{context}: {e}; item dropped"),
                ),
            }
        }
        out
    }

    fn skills(&mut self, container: &Element, context: &str) -> Vec<ExpertSkill> {
        let mut out = Vec::new();
        for item in self.bag_items(container, context) {
            let mut role = None;
            let mut skill = None;
            for part in item.elements() {
                match self.canonical(part).as_deref() {
                    Some("person.es.role" | "orgunit.es.role") => role = part.literal(),
                    Some("person.es.id" | "orgunit.es.skill") => skill = part.literal(),
                    _ => self.unknown(part, context),
                }
            }
            match skill {
                Some(skill) => out.push(ExpertSkill { role, skill }),
                None => self.warn(
                    WarningKind::EmptyListItem,
                    format!("{context}: expert skill without a skill dropped"),
                ),
            }
        }
        out
    }

    fn contacts(&mut self, container: &Element, context: &str) -> Vec<Contact> {
        let mut out = Vec::new();
        for item in self.bag_items(container, context) {
            let mut c = Contact::default();
            for part in item.elements() {
                let value = part.literal();
                match self.canonical(part).as_deref() {
                    Some("contact.telephone") => c.telephone = value,
                    Some("contact.fax") => c.fax = value,
                    Some("contact.email") => c.email = value,
                    Some("contact.uri") => c.uri = value,
                    Some("contact.address") => c.address = value,
                    _ => self.unknown(part, context),
                }
            }
            if c.is_empty() {
                self.warn(
                    WarningKind::EmptyListItem,
                    format!("{context}: empty contact dropped"),
                );
            } else {
                out.push(c);
            }
        }
        out
    }

    /// Reads a `cerif:relation` element. `holder` is the enclosing record,
    /// absent for top-level relation nodes.
    fn relation(&mut self, item: &Element, holder: Option<&RecordKey>, context: &str) -> Option<Relation> {
        let mut source = holder.cloned();
        let mut target = None;
        let mut role = None;
        let mut mandatory = false;
        for part in item.elements() {
            let Some(name) = self.canonical(part) else {
                self.unknown(part, context);
                continue;
            };
            if let Some(ty) = name.strip_prefix(REL_TARGET_PREFIX) {
                target = self.reference(part, ty, context);
            } else if let Some(ty) = name.strip_prefix(REL_SOURCE_PREFIX) {
                if holder.is_some() {
                    self.warn(
                        WarningKind::UnknownElement,
                        format!("{context}: nested relation names a source; holder used"),
                    );
                } else {
                    source = self.reference(part, ty, context);
                }
            } else if name == "rel.role" {
                role = part.literal();
            } else if name == "rel.mandatory" {
                mandatory = match part.literal().as_deref().map(str::to_ascii_lowercase).as_deref() {
                    Some("true" | "yes" | "1") => true,
                    None | Some("false" | "no" | "0") => false,
                    Some(other) => {
                        self.warn(
                            WarningKind::UnknownElement,
                            format!("{context}: mandatory flag {other:?} read as false"),
                        );
                        false
                    }
                };
            } else {
                self.unknown(part, context);
            }
        }
        match (source, target) {
            (Some(source), Some(target)) => Some(Relation::new(
                source,
                target,
                role.as_deref().unwrap_or(""),
                mandatory,
            )),
            _ => {
                self.warn(
                    WarningKind::EmptyListItem,
                    format!("{context}: relation without both endpoints dropped"),
                );
                None
            }
        }
    }

    fn reference(&mut self, part: &Element, ty: &str, context: &str) -> Option<RecordKey> {
        let ty = RecordType::from_token(ty)?;
        let id = part
            .attr(&["resource", "rdf:resource"])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .or_else(|| part.literal());
        if id.is_none() {
            self.warn(
                WarningKind::EmptyListItem,
                format!("{context}: <{}> has no resource", part.qname()),
            );
        }
        id.map(|id| RecordKey::new(ty, id))
    }

    fn relations(&mut self, container: &Element, holder: &RecordKey, context: &str) -> Vec<Relation> {
        let mut out = Vec::new();
        for item in self.bag_items(container, context) {
            if self.canonical(item).as_deref() != Some("relation") {
                self.unknown(item, context);
                continue;
            }
            if let Some(rel) = self.relation(item, Some(holder), context) {
                out.push(rel);
            }
        }
        out
    }

    fn set_once<T>(&mut self, slot: &mut Option<T>, value: Option<T>, el: &Element, context: &str) {
        if slot.is_some() {
            self.warn(
                WarningKind::UnknownElement,
                format!("{context}: repeated <{}> ignored", el.qname()),
            );
        } else {
            *slot = value;
        }
    }

    fn date(&mut self, el: &Element, context: &str) -> Option<crate::model::PartialDate> {
        let text = el.literal()?;
        match parse_partial_date(&text) {
            Ok(d) => Some(d),
            Err(e) => {
                self.warn(WarningKind::UnknownElement, format!("{context}: {e}; value dropped"));
                None
            }
        }
    }

    fn project(&mut self, node: &Element, id: String) -> Project {
        let key = RecordKey::new(RecordType::Project, id.clone());
        let context = key.to_string();
        let mut p = Project::new(id);
        let mut prizes: Option<Vec<String>> = None;
        for el in node.elements() {
            let Some(name) = self.canonical(el) else {
                self.unknown(el, &context);
                continue;
            };
            match name.as_str() {
                "proj_status" => {
                    let status = el.literal().and_then(|s| match s.parse::<ProjectStatus>() {
                        Ok(st) => Some(st),
                        Err(e) => {
                            self.warn(WarningKind::UnknownElement, format!("{context}: {e}"));
                            None
                        }
                    });
                    let mut slot = p.status.take();
                    self.set_once(&mut slot, status, el, &context);
                    p.status = slot;
                }
                "proj_startdate" => {
                    let d = self.date(el, &context);
                    let mut slot = p.start.take();
                    self.set_once(&mut slot, d, el, &context);
                    p.start = slot;
                }
                "proj_enddate" => {
                    let d = self.date(el, &context);
                    let mut slot = p.end.take();
                    self.set_once(&mut slot, d, el, &context);
                    p.end = slot;
                }
                "proj_uri" => {
                    let mut slot = p.uri.take();
                    self.set_once(&mut slot, el.literal(), el, &context);
                    p.uri = slot;
                }
                "proj_prizeaward" => {
                    let items = el.literal().map(|s| split_semicolon_list(&s)).unwrap_or_default();
                    self.set_once(&mut prizes, Some(items), el, &context);
                }
                "project-titles" => {
                    let t = self.translated_texts(el, "Project-title", &context);
                    p.titles.extend(t);
                }
                "project-abstracts" => {
                    let t = self.translated_texts(el, "Project-abstract", &context);
                    p.abstracts.extend(t);
                }
                "project-keywords" => {
                    let t = self.translated_texts(el, "Project-keyword", &context);
                    p.keywords.extend(t);
                }
                "relations" => {
                    let r = self.relations(el, &key, &context);
                    p.relations.extend(r);
                }
                _ => self.unknown(el, &context),
            }
        }
        p.prize_awards = prizes.unwrap_or_default();
        p
    }

    fn person(&mut self, node: &Element, id: String) -> Person {
        let key = RecordKey::new(RecordType::Person, id.clone());
        let context = key.to_string();
        let mut p = Person::new(id, "");
        for el in node.elements() {
            let Some(name) = self.canonical(el) else {
                self.unknown(el, &context);
                continue;
            };
            match name.as_str() {
                "person.per_family_names" => p.family_names = el.literal().unwrap_or_default(),
                "person.per_first_names" => p.first_names = el.literal().unwrap_or_default(),
                "person.per_sex" => {
                    p.sex = match el.literal().as_deref() {
                        Some("M" | "m") => Some(Sex::M),
                        Some("F" | "f") => Some(Sex::F),
                        None => None,
                        Some(other) => {
                            self.warn(
                                WarningKind::UnknownElement,
                                format!("{context}: sex value {other:?} ignored"),
                            );
                            None
                        }
                    }
                }
                "person.per_prize_awards" => {
                    p.prize_awards = el.literal().map(|s| split_semicolon_list(&s)).unwrap_or_default()
                }
                "person.per_uri" => p.uri = el.literal(),
                "person.expert_skills" => {
                    let s = self.skills(el, &context);
                    p.expert_skills.extend(s);
                }
                "person.contacts" => {
                    let c = self.contacts(el, &context);
                    p.contacts.extend(c);
                }
                "relations" => {
                    let r = self.relations(el, &key, &context);
                    p.relations.extend(r);
                }
                _ => self.unknown(el, &context),
            }
        }
        p
    }

    fn orgunit(&mut self, node: &Element, id: String) -> OrgUnit {
        let key = RecordKey::new(RecordType::OrgUnit, id.clone());
        let context = key.to_string();
        let mut o = OrgUnit::new(id);
        for el in node.elements() {
            let Some(name) = self.canonical(el) else {
                self.unknown(el, &context);
                continue;
            };
            match name.as_str() {
                "orgunit.org_acronym" => o.acronym = el.literal(),
                "orgunit.org_prizeaward" => o.prize_award = el.literal(),
                "orgunit.org_url" => o.url = el.literal(),
                "orgunit.orgunit_names" => {
                    let t = self.translated_texts(el, "orgunit.orgunit_name", &context);
                    o.names.extend(t);
                }
                "orgunit.ext.descriptions" => {
                    let t = self.translated_texts(el, "orgunit.ext.description", &context);
                    o.descriptions.extend(t);
                }
                "orgunit.ou_ou_relations" => {
                    for item in self.bag_items(el, &context) {
                        let mut target = None;
                        let mut role = None;
                        for part in item.elements() {
                            match self.canonical(part).as_deref() {
                                Some("orgunit.ou_ou_r.orgunit") => {
                                    target = self
                                        .reference(part, "orgunit", &context)
                                        .map(|k| k.id)
                                }
                                Some("orgunit.ou_ou_r.role") => role = part.literal(),
                                _ => self.unknown(part, &context),
                            }
                        }
                        match target {
                            Some(target) => o.ou_relations.push(OuOuRelation {
                                target,
                                role: role.unwrap_or_default(),
                            }),
                            None => self.warn(
                                WarningKind::EmptyListItem,
                                format!("{context}: org-unit relation without target dropped"),
                            ),
                        }
                    }
                }
                "orgunit.expert_skills" => {
                    let s = self.skills(el, &context);
                    o.expert_skills.extend(s);
                }
                "orgunit.contacts" => {
                    let c = self.contacts(el, &context);
                    o.contacts.extend(c);
                }
                "relations" => {
                    let r = self.relations(el, &key, &context);
                    o.relations.extend(r);
                }
                _ => self.unknown(el, &context),
            }
        }
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TextRole {
    Language,
    Translation,
    Text,
}

fn text_role(canonical: &str) -> Option<TextRole> {
    match canonical {
        "proj_title_language" | "proj_abs_language" | "proj_kw_language" | "lang"
        | "orgunit.oun.language" | "orgunit.oud.language" => Some(TextRole::Language),
        "proj_title_trans_type" | "proj_abs_trans_type" | "proj_kw_trans_type" | "translation"
        | "orgunit.oun.translation" | "orgunit.oud.translation" => Some(TextRole::Translation),
        "proj_title" | "proj_abstract" | "proj_keywords" | "orgunit.oun.name"
        | "orgunit.oud.text" => Some(TextRole::Text),
        _ => None,
    }
}

fn node_id(node: &Element) -> Option<String> {
    node.attr(&["ID", "rdf:ID", "id"])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

fn check_root(root: &Element) -> Result<()> {
    if root.is_rdf("RDF") {
        Ok(())
    } else {
        Err(Error::Xml(format!(
            "root element is <{}>, expected <rdf:RDF>",
            root.qname()
        )))
    }
}

/// Parses one CERIF-RDF document using the default namespace settings.
pub fn parse_document(text: &str) -> Result<(RecordSet, Vec<Warning>)> {
    parse_document_with(text, &CodecOptions::default())
}

pub fn parse_document_with(text: &str, opts: &CodecOptions) -> Result<(RecordSet, Vec<Warning>)> {
    let root = build_tree(text)?;
    check_root(&root)?;
    let mut ctx = Ctx {
        opts,
        warnings: Vec::new(),
        assumed_ns_reported: false,
    };
    let mut rs = RecordSet::new();
    rs.declared_namespaces = root
        .attrs
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("xmlns:").map(|p| (p.to_string(), v.clone())))
        .collect();

    let mut pending_relations = Vec::new();
    let mut ids_by_type: BTreeMap<String, RecordType> = BTreeMap::new();
    for node in root.elements() {
        let Some(name) = ctx.canonical(node) else {
            ctx.warn(
                WarningKind::UnsupportedNode,
                format!("top-level <{}> is not a CERIF node; ignored", node.qname()),
            );
            continue;
        };
        if name == "relation" {
            if let Some(rel) = ctx.relation(node, None, "relation") {
                pending_relations.push(rel);
            }
            continue;
        }
        let Some(record_type) = RecordType::from_token(&name) else {
            ctx.warn(
                WarningKind::UnsupportedNode,
                format!("top-level <{}> ignored", node.qname()),
            );
            continue;
        };
        let id = node_id(node).ok_or_else(|| Error::MissingId(node.qname()))?;
        if !record_type.is_modelled() {
            ctx.warn(
                WarningKind::UnsupportedNode,
                format!("{record_type} {id:?} has no field schema; ignored"),
            );
            continue;
        }
        if let Some(prev) = ids_by_type.insert(id.clone(), record_type) {
            if prev != record_type {
                ctx.warn(
                    WarningKind::DuplicateIdAcrossTypes,
                    format!("ID {id:?} is used by both {prev} and {record_type}"),
                );
            }
        }
        let record = match record_type {
            RecordType::Project => Record::Project(ctx.project(node, id)),
            RecordType::Person => Record::Person(ctx.person(node, id)),
            RecordType::OrgUnit => Record::OrgUnit(ctx.orgunit(node, id)),
            _ => unreachable!("unmodelled types are skipped above"),
        };
        rs.insert(record)?;
    }
    for rel in pending_relations {
        rs.add_relation(rel);
    }
    Ok((rs, ctx.warnings))
}

/// Keys of all typed nodes in document order, duplicates included.
///
/// Nodes lacking an `ID` are skipped; [`parse_document`] reports them.
pub fn typed_node_keys(text: &str) -> Result<Vec<RecordKey>> {
    let opts = CodecOptions::default();
    let root = build_tree(text)?;
    check_root(&root)?;
    let mut ctx = Ctx {
        opts: &opts,
        warnings: Vec::new(),
        assumed_ns_reported: false,
    };
    let mut keys = Vec::new();
    for node in root.elements() {
        let Some(name) = ctx.canonical(node) else {
            continue;
        };
        if let (Some(ty), Some(id)) = (RecordType::from_token(&name), node_id(node)) {
            keys.push(RecordKey::new(ty, id));
        }
    }
    Ok(keys)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

struct Writer {
    out: String,
    depth: usize,
}

impl Writer {
    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn open(&mut self, name: &str) {
        self.indent();
        self.out.push_str(&format!("<cerif:{name}>\n"));
        self.depth += 1;
    }

    fn open_raw(&mut self, tag: &str) {
        self.indent();
        self.out.push_str(&format!("<{tag}>\n"));
        self.depth += 1;
    }

    fn close(&mut self, name: &str) {
        self.close_raw(&format!("cerif:{name}"));
    }

    fn close_raw(&mut self, tag: &str) {
        self.depth -= 1;
        self.indent();
        self.out.push_str(&format!("</{tag}>\n"));
    }

    fn leaf(&mut self, name: &str, value: &str) {
        self.indent();
        self.out
            .push_str(&format!("<cerif:{name}>{}</cerif:{name}>\n", escape(value)));
    }

    fn opt_leaf(&mut self, name: &str, value: Option<&str>) {
        if let Some(v) = value {
            self.leaf(name, v);
        }
    }

    fn reference(&mut self, name: &str, id: &str) {
        self.indent();
        self.out
            .push_str(&format!("<cerif:{name} resource=\"{}\"/>\n", escape(id)));
    }

    /// `container > rdf:Bag > rdf:li > item` for every element of `items`.
    fn bag<T>(&mut self, container: &str, items: &[T], mut body: impl FnMut(&mut Self, &T)) {
        if items.is_empty() {
            return;
        }
        self.open(container);
        self.open_raw("rdf:Bag");
        for item in items {
            self.open_raw("rdf:li");
            body(self, item);
            self.close_raw("rdf:li");
        }
        self.close_raw("rdf:Bag");
        self.close(container);
    }

    fn texts(&mut self, container: &str, item: &str, fields: [&str; 3], texts: &[TranslatedText]) {
        self.bag(container, texts, |w, t| {
            w.open(item);
            w.leaf(fields[0], &t.language);
            w.leaf(fields[1], &t.translation.code().to_string());
            w.leaf(fields[2], &t.text);
            w.close(item);
        });
    }

    fn skills(&mut self, prefix: &str, skill_field: &str, skills: &[ExpertSkill]) {
        self.bag(&format!("{prefix}.expert_skills"), skills, |w, s| {
            let item = format!("{prefix}.expert_skill");
            w.open(&item);
            w.opt_leaf(&format!("{prefix}.es.role"), s.role.as_deref());
            w.leaf(&format!("{prefix}.es.{skill_field}"), &s.skill);
            w.close(&item);
        });
    }

    fn contacts(&mut self, container: &str, contacts: &[Contact]) {
        self.bag(container, contacts, |w, c| {
            w.open("contact");
            w.opt_leaf("contact.telephone", c.telephone.as_deref());
            w.opt_leaf("contact.fax", c.fax.as_deref());
            w.opt_leaf("contact.email", c.email.as_deref());
            w.opt_leaf("contact.uri", c.uri.as_deref());
            w.opt_leaf("contact.address", c.address.as_deref());
            w.close("contact");
        });
    }

    fn relation_body(&mut self, rel: &Relation, with_source: bool) {
        if with_source {
            self.reference(
                &format!("{REL_SOURCE_PREFIX}{}", rel.source.record_type),
                &rel.source.id,
            );
        }
        self.reference(
            &format!("{REL_TARGET_PREFIX}{}", rel.target.record_type),
            &rel.target.id,
        );
        if !rel.role.is_empty() {
            self.leaf("rel.role", &rel.role);
        }
        if rel.mandatory {
            self.leaf("rel.mandatory", "true");
        }
    }

    fn relations(&mut self, relations: &[Relation]) {
        self.bag("relations", relations, |w, r| {
            w.open("relation");
            w.relation_body(r, false);
            w.close("relation");
        });
    }

    fn project(&mut self, p: &Project) {
        self.indent();
        self.out
            .push_str(&format!("<cerif:project ID=\"{}\">\n", escape(p.id.as_str())));
        self.depth += 1;
        self.opt_leaf("proj_status", p.status.map(ProjectStatus::token));
        self.opt_leaf("proj_startdate", p.start.as_ref().map(format_partial_date).as_deref());
        self.opt_leaf("proj_enddate", p.end.as_ref().map(format_partial_date).as_deref());
        self.opt_leaf("proj_uri", p.uri.as_deref());
        if !p.prize_awards.is_empty() {
            self.leaf("proj_prizeaward", &join_semicolon_list(&p.prize_awards));
        }
        self.texts(
            "project-titles",
            "Project-title",
            ["proj_title_language", "proj_title_trans_type", "proj_title"],
            &p.titles,
        );
        self.texts(
            "project-abstracts",
            "Project-abstract",
            ["proj_abs_language", "proj_abs_trans_type", "proj_abstract"],
            &p.abstracts,
        );
        self.texts(
            "project-keywords",
            "Project-keyword",
            ["proj_kw_language", "proj_kw_trans_type", "proj_keywords"],
            &p.keywords,
        );
        self.relations(&p.relations);
        self.close("project");
    }

    fn person(&mut self, p: &Person) {
        self.indent();
        self.out
            .push_str(&format!("<cerif:person ID=\"{}\">\n", escape(p.id.as_str())));
        self.depth += 1;
        self.leaf("person.per_family_names", &p.family_names);
        if !p.first_names.is_empty() {
            self.leaf("person.per_first_names", &p.first_names);
        }
        self.opt_leaf(
            "person.per_sex",
            p.sex.map(|s| match s {
                Sex::M => "M",
                Sex::F => "F",
            }),
        );
        if !p.prize_awards.is_empty() {
            self.leaf("person.per_prize_awards", &join_semicolon_list(&p.prize_awards));
        }
        self.opt_leaf("person.per_uri", p.uri.as_deref());
        self.skills("person", "id", &p.expert_skills);
        self.contacts("person.contacts", &p.contacts);
        self.relations(&p.relations);
        self.close("person");
    }

    fn orgunit(&mut self, o: &OrgUnit) {
        self.indent();
        self.out
            .push_str(&format!("<cerif:orgunit ID=\"{}\">\n", escape(o.id.as_str())));
        self.depth += 1;
        self.opt_leaf("orgunit.org_acronym", o.acronym.as_deref());
        self.opt_leaf("orgunit.org_prizeaward", o.prize_award.as_deref());
        self.opt_leaf("orgunit.org_url", o.url.as_deref());
        self.texts(
            "orgunit.orgunit_names",
            "orgunit.orgunit_name",
            ["orgunit.oun.language", "orgunit.oun.translation", "orgunit.oun.name"],
            &o.names,
        );
        self.texts(
            "orgunit.ext.descriptions",
            "orgunit.ext.description",
            ["orgunit.oud.language", "orgunit.oud.translation", "orgunit.oud.text"],
            &o.descriptions,
        );
        self.bag("orgunit.ou_ou_relations", &o.ou_relations, |w, r| {
            w.open("orgunit.ou_ou_relation");
            w.reference("orgunit.ou_ou_r.orgunit", &r.target);
            w.leaf("orgunit.ou_ou_r.role", &r.role);
            w.close("orgunit.ou_ou_relation");
        });
        self.skills("orgunit", "skill", &o.expert_skills);
        self.contacts("orgunit.contacts", &o.contacts);
        self.relations(&o.relations);
        self.close("orgunit");
    }
}

/// Serializes with the default namespace settings.
pub fn serialize_document(rs: &RecordSet) -> Result<String> {
    serialize_document_with(rs, &CodecOptions::default())
}

pub fn serialize_document_with(rs: &RecordSet, opts: &CodecOptions) -> Result<String> {
    let mut problems = Vec::new();
    for (key, record) in &rs.records {
        if *key != record.key() {
            problems.push(format!("{key}: stored under a foreign key {}", record.key()));
        }
        for v in validate::validate_record(record) {
            problems.push(format!("{key}: {v}"));
        }
    }
    for rel in &rs.external_relations {
        for v in validate::validate_relation(rel) {
            problems.push(format!("relation {} -> {}: {v}", rel.source, rel.target));
        }
    }
    if !problems.is_empty() {
        return Err(Error::InvariantViolation {
            context: "cannot serialize record set".into(),
            violations: problems.join("; "),
        });
    }

    let mut w = Writer {
        out: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
        depth: 0,
    };
    w.out.push_str(&format!(
        "<rdf:RDF xmlns:rdf=\"{RDF_NS}\" xmlns:rdfs=\"{RDFS_NS}\" xmlns:cerif=\"{}\"",
        escape(opts.cerif_ns.as_str())
    ));
    for (prefix, uri) in &rs.declared_namespaces {
        if !matches!(prefix.as_str(), "rdf" | "rdfs" | "cerif") {
            w.out
                .push_str(&format!(" xmlns:{prefix}=\"{}\"", escape(uri.as_str())));
        }
    }
    w.out.push_str(">\n");
    w.depth = 1;
    for record in rs.records.values() {
        match record {
            Record::Project(p) => w.project(p),
            Record::Person(p) => w.person(p),
            Record::OrgUnit(o) => w.orgunit(o),
        }
    }
    for rel in &rs.external_relations {
        w.open("relation");
        w.relation_body(rel, true);
        w.close("relation");
    }
    w.out.push_str("</rdf:RDF>\n");
    Ok(w.out)
}
