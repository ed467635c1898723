//! Multi-source record store with provenance, a triple view and
//! equivalence-expanded pattern queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result, Warning, WarningKind};
use crate::exchange::{ExchangeKind, ExchangeName};
use crate::model::{parse_partial_date, FieldValue, PartialDate, Record, RecordKey, Relation, TranslationType};
use crate::rdf::{parse_document, serialize_document, RecordSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProvenanceKind {
    All,
    PerObject,
    Annual,
    Change,
    Extracted,
}

impl ProvenanceKind {
    pub fn token(self) -> &'static str {
        match self {
            ProvenanceKind::All => "all",
            ProvenanceKind::PerObject => "per-object",
            ProvenanceKind::Annual => "annual",
            ProvenanceKind::Change => "change",
            ProvenanceKind::Extracted => "extracted",
        }
    }
}

impl FromStr for ProvenanceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            ProvenanceKind::All,
            ProvenanceKind::PerObject,
            ProvenanceKind::Annual,
            ProvenanceKind::Change,
            ProvenanceKind::Extracted,
        ]
        .into_iter()
        .find(|k| k.token() == s.trim())
        .ok_or_else(|| format!("unknown provenance kind {s:?}"))
    }
}

impl From<ExchangeKind> for ProvenanceKind {
    fn from(k: ExchangeKind) -> Self {
        match k {
            ExchangeKind::All => ProvenanceKind::All,
            ExchangeKind::PerObject => ProvenanceKind::PerObject,
            ExchangeKind::Annual => ProvenanceKind::Annual,
            ExchangeKind::Change => ProvenanceKind::Change,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    pub source: String,
    pub fetched: PartialDate,
    pub kind: ProvenanceKind,
}

impl Provenance {
    pub fn new(source: &str, fetched: PartialDate, kind: ProvenanceKind) -> Result<Self> {
        if !fetched.is_full() {
            return Err(Error::format(&fetched.to_string(), "fetch date must be DD.MM.YYYY"));
        }
        let source = source
            .chars()
            .map(|c| if c.is_control() { ' ' } else { c })
            .collect();
        Ok(Provenance {
            source,
            fetched,
            kind,
        })
    }

    /// Provenance implied by an exchange file name. Annual files count as
    /// fetched on 1 January of their year.
    pub fn from_exchange_name(name: &ExchangeName, source: &str) -> Result<Self> {
        let fetched = match name.kind {
            ExchangeKind::Annual => PartialDate::full(1, 1, name.date.year())?,
            _ => name.date,
        };
        Provenance::new(source, fetched, name.kind.into())
    }

    fn rank<'a>(&'a self, record: &'a Record) -> impl Ord + 'a {
        (self.fetched.earliest(), &self.source, self.kind, record)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    pub current: BTreeMap<RecordKey, (Record, Provenance)>,
    /// Superseded versions in the order they were displaced.
    pub history: Vec<(Record, Provenance)>,
    /// Relations received without their holding record.
    pub external_relations: BTreeSet<Relation>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Versions held, current and superseded.
    pub fn version_count(&self) -> usize {
        self.current.len() + self.history.len()
    }

    /// Merges a set. Per key the version with the latest fetch date wins;
    /// on equal dates the greatest source name wins (reported as a
    /// warning), and identical provenance falls back to the record itself
    /// so the outcome never depends on merge order. A version already held
    /// (same record, same provenance) is not stored twice.
    pub fn merge(&mut self, rs: &RecordSet, prov: &Provenance) -> Vec<Warning> {
        let mut warnings = Vec::new();
        for (key, record) in &rs.records {
            let held = |(r, p): &(Record, Provenance)| r == record && p == prov;
            if self.current.get(key).is_some_and(held) || self.history.iter().any(held) {
                continue;
            }
            match self.current.remove(key) {
                None => {
                    self.current.insert(key.clone(), (record.clone(), prov.clone()));
                }
                Some((old, old_prov)) => {
                    if old_prov.fetched.earliest() == prov.fetched.earliest() && old_prov.source != prov.source {
                        warnings.push(Warning::new(
                            WarningKind::TieBreak,
                            format!(
                                "{key}: {:?} and {:?} both dated {}; keeping the greater source name",
                                old_prov.source, prov.source, prov.fetched
                            ),
                        ));
                    }
                    let (keep, drop) = if prov.rank(record) > old_prov.rank(&old) {
                        ((record.clone(), prov.clone()), (old, old_prov))
                    } else {
                        ((old, old_prov), (record.clone(), prov.clone()))
                    };
                    self.current.insert(key.clone(), keep);
                    self.history.push(drop);
                }
            }
        }
        self.external_relations
            .extend(rs.external_relations.iter().cloned());
        warnings
    }

    /// Every version of `key`, current first.
    pub fn versions(&self, key: &RecordKey) -> Vec<&(Record, Provenance)> {
        self.current
            .get(key)
            .into_iter()
            .chain(self.history.iter().filter(|(r, _)| &r.key() == key))
            .collect()
    }

    pub fn current_set(&self) -> RecordSet {
        let mut rs = RecordSet::new();
        for (key, (record, _)) in &self.current {
            rs.records.insert(key.clone(), record.clone());
        }
        for rel in &self.external_relations {
            rs.add_relation(rel.clone());
        }
        rs
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let io = |p: &Path| {
            let p = p.to_path_buf();
            move |e| Error::io(p, e)
        };
        let current_dir = dir.join("current");
        let history_dir = dir.join("history");
        for sub in [&current_dir, &history_dir] {
            if sub.exists() {
                std::fs::remove_dir_all(sub).map_err(io(sub))?;
            }
            std::fs::create_dir_all(sub).map_err(io(sub))?;
        }
        let single = |record: &Record| -> Result<String> {
            let mut rs = RecordSet::new();
            rs.insert(record.clone())?;
            serialize_document(&rs)
        };
        let mut index = String::new();
        for (key, (record, prov)) in &self.current {
            let file = format!("{}.{}.rdf", key.record_type.token(), file_safe(&key.id));
            let path = current_dir.join(&file);
            std::fs::write(&path, single(record)?).map_err(io(&path))?;
            index.push_str(&index_line(&format!("current/{file}"), key, prov));
        }
        let path = dir.join("provenance.idx");
        std::fs::write(&path, index).map_err(io(&path))?;

        let mut index = String::new();
        for (n, (record, prov)) in self.history.iter().enumerate() {
            let file = format!("{n:06}.rdf");
            let path = history_dir.join(&file);
            std::fs::write(&path, single(record)?).map_err(io(&path))?;
            index.push_str(&index_line(&format!("history/{file}"), &record.key(), prov));
        }
        let path = dir.join("history.idx");
        std::fs::write(&path, index).map_err(io(&path))?;

        let mut rels = RecordSet::new();
        rels.external_relations = self.external_relations.clone();
        let path = dir.join("relations.rdf");
        std::fs::write(&path, serialize_document(&rels)?).map_err(io(&path))?;
        Ok(())
    }

    /// Loads a store directory; a directory without an index is an empty
    /// store.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut store = Store::new();
        let current = read_index(dir, "provenance.idx")?;
        for (key, record, prov) in current {
            store.current.insert(key, (record, prov));
        }
        store.history = read_index(dir, "history.idx")?
            .into_iter()
            .map(|(_, r, p)| (r, p))
            .collect();
        let path = dir.join("relations.rdf");
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let (rs, _) = parse_document(&text)?;
            store.external_relations = rs.external_relations;
        }
        Ok(store)
    }
}

fn file_safe(id: &str) -> String {
    let mut out = String::new();
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b'.' {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn index_line(file: &str, key: &RecordKey, prov: &Provenance) -> String {
    format!(
        "{key}\t{}\t{}\t{}\t{file}\n",
        prov.source,
        prov.fetched,
        prov.kind.token()
    )
}

fn read_index(dir: &Path, name: &str) -> Result<Vec<(RecordKey, Record, Provenance)>> {
    let path = dir.join(name);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::BadLine {
            path: path.clone(),
            line: i + 1,
            reason,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let [key, source, date, kind, file] = cols[..] else {
            return Err(bad(format!("expected 5 tab-separated columns, got {}", cols.len())));
        };
        let key: RecordKey = key.parse().map_err(bad)?;
        let fetched = parse_partial_date(date).map_err(|e| bad(e.to_string()))?;
        let kind: ProvenanceKind = kind.parse().map_err(bad)?;
        let prov = Provenance::new(source, fetched, kind).map_err(|e| bad(e.to_string()))?;
        let rpath = dir.join(file);
        let doc = std::fs::read_to_string(&rpath).map_err(|e| Error::io(&rpath, e))?;
        let (mut rs, _) = parse_document(&doc)?;
        let record = rs
            .records
            .remove(&key)
            .ok_or_else(|| bad(format!("{file} does not describe {key}")))?;
        out.push((key, record, prov));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Triples
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Node(RecordKey),
    Literal {
        text: String,
        language: Option<String>,
        translation: Option<TranslationType>,
        qualifier: Option<String>,
    },
}

impl Term {
    pub fn literal(text: &str) -> Term {
        Term::Literal {
            text: text.to_string(),
            language: None,
            translation: None,
            qualifier: None,
        }
    }

    /// Whether the query term `t` names this term: a node matches its
    /// `type:id` form or its bare id, a literal its text.
    pub fn matches(&self, t: &str) -> bool {
        match self {
            Term::Node(k) => k.id == t || k.to_string() == t,
            Term::Literal { text, .. } => text == t,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Node(k) => write!(f, "{k}"),
            Term::Literal {
                text,
                language,
                translation,
                qualifier,
            } => {
                write!(f, "{text:?}")?;
                if let Some(l) = language {
                    write!(f, "@{l}")?;
                }
                if let Some(t) = translation {
                    write!(f, "/{}", t.code())?;
                }
                if let Some(q) = qualifier {
                    write!(f, " [{q}]")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: RecordKey,
    pub predicate: String,
    pub object: Term,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

pub fn record_triples(record: &Record) -> Vec<Triple> {
    let subject = record.key();
    record
        .fields()
        .into_iter()
        .map(|(name, value)| {
            let (predicate, object) = match value {
                FieldValue::Text(text) => (name.to_string(), Term::literal(&text)),
                FieldValue::Translated(t) => (
                    name.to_string(),
                    Term::Literal {
                        text: t.text,
                        language: Some(t.language),
                        translation: Some(t.translation),
                        qualifier: None,
                    },
                ),
                FieldValue::Qualified { qualifier, text } => (
                    name.to_string(),
                    Term::Literal {
                        text,
                        language: None,
                        translation: None,
                        qualifier,
                    },
                ),
                FieldValue::Link { role, target, .. } => (role, Term::Node(target)),
            };
            Triple {
                subject: subject.clone(),
                predicate,
                object,
            }
        })
        .collect()
}

pub fn to_triples(store: &Store) -> BTreeSet<Triple> {
    let mut out: BTreeSet<Triple> = store
        .current
        .values()
        .flat_map(|(r, _)| record_triples(r))
        .collect();
    out.extend(store.external_relations.iter().map(|r| Triple {
        subject: r.source.clone(),
        predicate: r.role.clone(),
        object: Term::Node(r.target.clone()),
    }));
    out
}

// ---------------------------------------------------------------------------
// Equivalence map and queries
// ---------------------------------------------------------------------------

/// Disjoint classes of interchangeable terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivalenceMap {
    classes: Vec<BTreeSet<String>>,
}

impl EquivalenceMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a class, merging it with every existing class it overlaps.
    pub fn add_class<I, S>(&mut self, terms: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut merged: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        if merged.is_empty() {
            return;
        }
        self.classes.retain(|c| {
            if c.is_disjoint(&merged) {
                true
            } else {
                merged.extend(c.iter().cloned());
                false
            }
        });
        self.classes.push(merged);
        self.classes.sort();
    }

    pub fn classes(&self) -> &[BTreeSet<String>] {
        &self.classes
    }

    /// The class of `term`, always containing `term` itself.
    pub fn expand(&self, term: &str) -> BTreeSet<String> {
        self.classes
            .iter()
            .find(|c| c.contains(term))
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([term.to_string()]))
    }

    pub fn parse(text: &str) -> Self {
        let mut map = EquivalenceMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or_default();
            let terms: Vec<&str> = line
                .split(['≡', '\t'])
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect();
            map.add_class(terms);
        }
        map
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(EquivalenceMap::parse(&text))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    /// `?name` binds; `?` and `*` match anything without binding.
    Wildcard(Option<String>),
    Term(String),
}

impl PatternTerm {
    pub fn parse(s: &str) -> PatternTerm {
        let s = s.trim();
        match s {
            "?" | "*" => PatternTerm::Wildcard(None),
            _ => match s.strip_prefix('?') {
                Some(name) => PatternTerm::Wildcard(Some(name.to_string())),
                None => PatternTerm::Term(s.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: &str, predicate: &str, object: &str) -> Self {
        TriplePattern {
            subject: PatternTerm::parse(subject),
            predicate: PatternTerm::parse(predicate),
            object: PatternTerm::parse(object),
        }
    }
}

impl FromStr for TriplePattern {
    type Err = Error;

    /// Accepts `(s, p, o)`, with or without the parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim();
        let inner = inner
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .unwrap_or(inner);
        let parts: Vec<&str> = inner.split(',').collect();
        match parts[..] {
            [a, b, c] if ![a, b, c].iter().any(|t| t.trim().is_empty()) => {
                Ok(TriplePattern::new(a, b, c))
            }
            _ => Err(Error::format(s, "expected (subject, predicate, object)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    pub vars: BTreeMap<String, Term>,
    pub triple: Triple,
}

pub fn query(store: &Store, p: &TriplePattern, eq: &EquivalenceMap) -> Vec<Binding> {
    query_triples(&to_triples(store), p, eq)
}

/// Pattern match over an explicit triple set.
pub fn query_triples(triples: &BTreeSet<Triple>, p: &TriplePattern, eq: &EquivalenceMap) -> Vec<Binding> {
    let expand = |t: &PatternTerm| match t {
        PatternTerm::Term(s) => Some(eq.expand(s)),
        PatternTerm::Wildcard(_) => None,
    };
    let (sx, px, ox) = (expand(&p.subject), expand(&p.predicate), expand(&p.object));
    let mut out = Vec::new();
    'triples: for t in triples {
        let subject = Term::Node(t.subject.clone());
        let predicate = Term::literal(&t.predicate);
        let positions = [
            (&p.subject, &sx, &subject),
            (&p.predicate, &px, &predicate),
            (&p.object, &ox, &t.object),
        ];
        let mut vars: BTreeMap<String, Term> = BTreeMap::new();
        for (pattern, expanded, value) in positions {
            match (pattern, expanded) {
                (_, Some(terms)) => {
                    if !terms.iter().any(|x| value.matches(x)) {
                        continue 'triples;
                    }
                }
                (PatternTerm::Wildcard(Some(name)), None) => match vars.get(name) {
                    Some(bound) if bound != value => continue 'triples,
                    Some(_) => {}
                    None => {
                        vars.insert(name.clone(), value.clone());
                    }
                },
                _ => {}
            }
        }
        out.push(Binding {
            vars,
            triple: t.clone(),
        });
    }
    out.sort();
    out
}
