//! Exchange files: name grammar, session packaging and checking, and the
//! identifier registry.
//!
//! Four name shapes exist:
//!
//! ```text
//! ORG.DD.MM.YYYY.ALL
//! ORG.DD.MM.YYYY.TYPE.ID
//! ANNUAL.ORG.YYYY.rdf
//! CHANGE.ORG.TYPE.ID.DD.MM.YYYY.rdf
//! ```
//!
//! Identifiers may contain dots. The registry remembers every identifier
//! ever sent so later sessions can be checked against it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{parse_partial_date, PartialDate, RecordKey, RecordType, Relation};
use crate::rdf::RecordSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExchangeKind {
    All,
    PerObject,
    Annual,
    Change,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExchangeName {
    pub kind: ExchangeKind,
    pub organization: String,
    pub date: PartialDate,
    pub record_type: Option<RecordType>,
    pub identifier: Option<String>,
    /// Whether the name ends in `.rdf`.
    pub extension: bool,
}

impl ExchangeName {
    pub fn all(org: &str, date: PartialDate) -> Self {
        ExchangeName {
            kind: ExchangeKind::All,
            organization: org.to_string(),
            date,
            record_type: None,
            identifier: None,
            extension: false,
        }
    }

    pub fn per_object(org: &str, date: PartialDate, ty: RecordType, id: &str) -> Self {
        ExchangeName {
            kind: ExchangeKind::PerObject,
            organization: org.to_string(),
            date,
            record_type: Some(ty),
            identifier: Some(id.to_string()),
            extension: false,
        }
    }

    pub fn annual(org: &str, year: u16) -> Result<Self> {
        Ok(ExchangeName {
            kind: ExchangeKind::Annual,
            organization: org.to_string(),
            date: PartialDate::year_only(year)?,
            record_type: None,
            identifier: None,
            extension: true,
        })
    }

    pub fn change(org: &str, ty: RecordType, id: &str, date: PartialDate) -> Self {
        ExchangeName {
            kind: ExchangeKind::Change,
            organization: org.to_string(),
            date,
            record_type: Some(ty),
            identifier: Some(id.to_string()),
            extension: true,
        }
    }

    /// The record this name announces, for per-object and change files.
    pub fn key(&self) -> Option<RecordKey> {
        match (self.record_type, &self.identifier) {
            (Some(t), Some(id)) => Some(RecordKey::new(t, id.clone())),
            _ => None,
        }
    }

    /// First broken invariant, if any.
    pub fn check(&self) -> Option<String> {
        if let Some(why) = organization_problem(&self.organization) {
            return Some(why);
        }
        let needs_key = matches!(self.kind, ExchangeKind::PerObject | ExchangeKind::Change);
        match (needs_key, self.record_type.is_some(), self.identifier.is_some()) {
            (true, true, true) | (false, false, false) => {}
            (true, _, _) => return Some("type and identifier are required".into()),
            (false, _, _) => return Some("type and identifier are not allowed".into()),
        }
        if let Some(id) = &self.identifier {
            if let Some(why) = identifier_problem(id) {
                return Some(why);
            }
        }
        match self.kind {
            ExchangeKind::Annual if self.date.month().is_some() => {
                Some("annual files carry a year only".into())
            }
            ExchangeKind::Annual => None,
            _ if !self.date.is_full() => Some("date must be DD.MM.YYYY".into()),
            _ => None,
        }
    }
}

impl fmt::Display for ExchangeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ty = self
            .record_type
            .map(|t| t.token().to_ascii_uppercase())
            .unwrap_or_default();
        let id = self.identifier.as_deref().unwrap_or_default();
        let org = &self.organization;
        let date = &self.date;
        match self.kind {
            ExchangeKind::All => write!(f, "{org}.{date}.ALL")?,
            ExchangeKind::PerObject => write!(f, "{org}.{date}.{ty}.{id}")?,
            ExchangeKind::Annual => write!(f, "ANNUAL.{org}.{date}")?,
            ExchangeKind::Change => write!(f, "CHANGE.{org}.{ty}.{id}.{date}")?,
        }
        if self.extension {
            f.write_str(".rdf")?;
        }
        Ok(())
    }
}

fn organization_problem(org: &str) -> Option<String> {
    if org.is_empty() {
        Some("organization is empty".into())
    } else if org.contains('.') {
        Some(format!("organization {org:?} contains '.'"))
    } else if org.chars().any(char::is_whitespace) {
        Some(format!("organization {org:?} contains whitespace"))
    } else if org.eq_ignore_ascii_case("ANNUAL") || org.eq_ignore_ascii_case("CHANGE") {
        Some(format!("organization {org:?} is a reserved word"))
    } else {
        None
    }
}

fn identifier_problem(id: &str) -> Option<String> {
    if id.chars().any(char::is_whitespace) {
        return Some(format!("identifier {id:?} contains whitespace"));
    }
    let segments: Vec<&str> = id.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Some(format!("identifier {id:?} has an empty segment"));
    }
    if segments.last().is_some_and(|s| s.eq_ignore_ascii_case("rdf")) {
        return Some(format!("identifier {id:?} ends in .rdf"));
    }
    None
}

pub fn format_name(n: &ExchangeName) -> Result<String> {
    match n.check() {
        Some(why) => Err(Error::InvariantViolation {
            context: "exchange name".into(),
            violations: why,
        }),
        None => Ok(n.to_string()),
    }
}

pub fn parse_name(s: &str) -> Result<ExchangeName> {
    let fail = |reason: &str| Error::UnrecognizedName {
        name: s.to_string(),
        reason: reason.to_string(),
    };
    let mut segs: Vec<&str> = Vec::new();
    for raw in s.trim().split('.') {
        if raw.trim().is_empty() {
            return Err(fail("empty segment"));
        }
        // "ORG DATE" with a space instead of a dot is tolerated.
        segs.extend(raw.split_whitespace());
    }
    let extension = segs.last().is_some_and(|x| x.eq_ignore_ascii_case("rdf"));
    if extension {
        segs.pop();
    }
    let full_date = |d: &[&str]| -> Result<PartialDate> {
        if d[0].len() != 2 || d[1].len() != 2 {
            return Err(fail("date must be DD.MM.YYYY"));
        }
        parse_partial_date(&d.join(".")).map_err(|e| fail(&e.to_string()))
    };
    let record_type = |t: &str| -> Result<RecordType> {
        RecordType::from_token(t).ok_or_else(|| fail(&format!("unknown type {t:?}")))
    };

    let name = match segs.first() {
        None => return Err(fail("empty name")),
        Some(first) if first.eq_ignore_ascii_case("ANNUAL") => {
            if segs.len() != 3 {
                return Err(fail("expected ANNUAL.ORG.YYYY.rdf"));
            }
            let year = segs[2];
            if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("year must be YYYY"));
            }
            let date = parse_partial_date(year).map_err(|e| fail(&e.to_string()))?;
            ExchangeName {
                kind: ExchangeKind::Annual,
                organization: segs[1].to_string(),
                date,
                record_type: None,
                identifier: None,
                extension,
            }
        }
        Some(first) if first.eq_ignore_ascii_case("CHANGE") => {
            if segs.len() < 7 {
                return Err(fail("expected CHANGE.ORG.TYPE.ID.DD.MM.YYYY.rdf"));
            }
            let n = segs.len();
            ExchangeName {
                kind: ExchangeKind::Change,
                organization: segs[1].to_string(),
                record_type: Some(record_type(segs[2])?),
                identifier: Some(segs[3..n - 3].join(".")),
                date: full_date(&segs[n - 3..])?,
                extension,
            }
        }
        Some(_) if segs.len() == 5 && segs[4].eq_ignore_ascii_case("ALL") => ExchangeName {
            kind: ExchangeKind::All,
            organization: segs[0].to_string(),
            date: full_date(&segs[1..4])?,
            record_type: None,
            identifier: None,
            extension,
        },
        Some(_) if segs.len() >= 6 => ExchangeName {
            kind: ExchangeKind::PerObject,
            organization: segs[0].to_string(),
            date: full_date(&segs[1..4])?,
            record_type: Some(record_type(segs[4])?),
            identifier: Some(segs[5..].join(".")),
            extension,
        },
        Some(_) => {
            // Tell a short date apart from other shape errors.
            if segs.last().is_some_and(|x| x.eq_ignore_ascii_case("ALL")) {
                return Err(fail("ALL files need ORG.DD.MM.YYYY.ALL (date not full)"));
            }
            return Err(fail("does not match any exchange name shape"));
        }
    };
    match name.check() {
        Some(why) => Err(fail(&why)),
        None => Ok(name),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionMode {
    All,
    PerObject,
}

/// Splits `rs` into the files of one session.
///
/// In per-object mode each relation goes into the files of both of its
/// endpoints; in the target's file it appears as an external relation.
/// Relations with neither endpoint in `rs` have no file to go to and are
/// left out.
pub fn plan_session(
    rs: &RecordSet,
    org: &str,
    date: &PartialDate,
    mode: SessionMode,
) -> Result<Vec<(ExchangeName, RecordSet)>> {
    let files = match mode {
        SessionMode::All => vec![(ExchangeName::all(org, *date), rs.clone())],
        SessionMode::PerObject => {
            let mut files = Vec::with_capacity(rs.len());
            for (key, record) in &rs.records {
                let mut part = RecordSet {
                    declared_namespaces: rs.declared_namespaces.clone(),
                    ..RecordSet::new()
                };
                part.insert(record.clone())?;
                for rel in rs.all_relations() {
                    if &rel.target == key && &rel.source != key {
                        part.add_relation(rel.clone());
                    }
                }
                for rel in &rs.external_relations {
                    if &rel.source == key {
                        part.add_relation(rel.clone());
                    }
                }
                files.push((
                    ExchangeName::per_object(org, *date, key.record_type, &key.id),
                    part,
                ));
            }
            files
        }
    };
    let mut seen: BTreeMap<String, RecordKey> = BTreeMap::new();
    for (name, part) in &files {
        let file = format_name(name)?;
        let owner = name
            .key()
            .or_else(|| part.records.keys().next().cloned())
            .unwrap_or_else(|| RecordKey::new(RecordType::Project, ""));
        if let Some(first) = seen.insert(file.to_lowercase(), owner.clone()) {
            return Err(Error::DuplicateObject {
                name: file,
                first,
                second: owner,
            });
        }
    }
    Ok(files)
}

/// Re-assembles the files of a session into one set. The same record in
/// two files must be described identically.
pub fn merge_session(files: &[(ExchangeName, RecordSet)]) -> Result<RecordSet> {
    let mut out = RecordSet::new();
    let mut relations = Vec::new();
    let mut external = Vec::new();
    for (_, part) in files {
        for (prefix, uri) in &part.declared_namespaces {
            out.declared_namespaces
                .entry(prefix.clone())
                .or_insert_with(|| uri.clone());
        }
        for (key, record) in &part.records {
            let mut bare = record.clone();
            relations.append(bare.relations_mut());
            match out.records.get(key) {
                Some(existing) if *existing == bare => {}
                Some(_) => return Err(Error::DuplicateId(key.clone())),
                None => {
                    out.records.insert(key.clone(), bare);
                }
            }
        }
        external.extend(part.external_relations.iter().cloned());
    }
    // Held relations first so every record keeps its own order.
    for rel in relations.into_iter().chain(external) {
        out.add_relation(rel);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SessionFlag {
    /// The same record is described in more than one file.
    DuplicateRecord { key: RecordKey, files: Vec<String> },
    /// A relation is missing from a file describing one of its endpoints.
    RelationNotDuplicated { relation: Relation, missing_from: String },
    /// An identifier appears under a type other than the one it was first
    /// seen with.
    TypeDrift {
        organization: String,
        id: String,
        registered: RecordType,
        found: RecordType,
    },
    /// A per-object file does not describe the record its name announces.
    MissingNamedRecord { file: String, key: RecordKey },
    /// Files of one session disagree on organization, date or kind.
    Inconsistent { reason: String },
}

impl fmt::Display for SessionFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionFlag::DuplicateRecord { key, files } => {
                write!(f, "DUPLICATE {key} in {}", files.join(", "))
            }
            SessionFlag::RelationNotDuplicated {
                relation,
                missing_from,
            } => write!(
                f,
                "RELATION-NOT-DUPLICATED {} -{}-> {} missing from {missing_from}",
                relation.source, relation.role, relation.target
            ),
            SessionFlag::TypeDrift {
                organization,
                id,
                registered,
                found,
            } => write!(
                f,
                "TYPE-DRIFT {organization} {id}: registered as {registered}, now {found}"
            ),
            SessionFlag::MissingNamedRecord { file, key } => {
                write!(f, "MISSING-NAMED-RECORD {file} lacks {key}")
            }
            SessionFlag::Inconsistent { reason } => write!(f, "INCONSISTENT {reason}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionReport {
    pub flags: Vec<SessionFlag>,
    /// Registry entries added by this check.
    pub registered: usize,
}

impl SessionReport {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Checks one session and, if nothing is flagged, records its identifiers
/// in `registry` (in memory; call [`IdRegistry::save`] to persist).
pub fn check_session(
    files: &[(ExchangeName, RecordSet)],
    registry: &mut IdRegistry,
) -> SessionReport {
    let mut flags = Vec::new();
    let names: Vec<String> = files.iter().map(|(n, _)| n.to_string()).collect();

    let orgs: BTreeSet<&str> = files.iter().map(|(n, _)| n.organization.as_str()).collect();
    let dates: BTreeSet<&PartialDate> = files.iter().map(|(n, _)| &n.date).collect();
    if orgs.len() > 1 {
        flags.push(SessionFlag::Inconsistent {
            reason: format!("several organizations: {}", orgs.into_iter().collect::<Vec<_>>().join(", ")),
        });
    }
    if dates.len() > 1 {
        flags.push(SessionFlag::Inconsistent {
            reason: "files carry different dates".into(),
        });
    }
    let all_files = files.iter().filter(|(n, _)| n.kind == ExchangeKind::All).count();
    if all_files > 1 || (all_files == 1 && files.len() > 1) {
        flags.push(SessionFlag::Inconsistent {
            reason: "an ALL session consists of exactly one file".into(),
        });
    }

    let mut holders: BTreeMap<&RecordKey, Vec<usize>> = BTreeMap::new();
    for (i, (_, part)) in files.iter().enumerate() {
        for key in part.records.keys() {
            holders.entry(key).or_default().push(i);
        }
    }
    for (key, at) in &holders {
        if at.len() > 1 {
            flags.push(SessionFlag::DuplicateRecord {
                key: (*key).clone(),
                files: at.iter().map(|&i| names[i].clone()).collect(),
            });
        }
    }

    for (i, (name, part)) in files.iter().enumerate() {
        if let Some(key) = name.key() {
            if !part.records.contains_key(&key) {
                flags.push(SessionFlag::MissingNamedRecord {
                    file: names[i].clone(),
                    key,
                });
            }
        }
    }

    let mut relations: BTreeSet<&Relation> = BTreeSet::new();
    for (_, part) in files {
        relations.extend(part.all_relations());
    }
    for rel in relations {
        for endpoint in [&rel.source, &rel.target] {
            for &i in holders.get(endpoint).map(Vec::as_slice).unwrap_or_default() {
                if !files[i].1.contains_relation(rel) {
                    flags.push(SessionFlag::RelationNotDuplicated {
                        relation: rel.clone(),
                        missing_from: names[i].clone(),
                    });
                }
            }
        }
    }

    let mut seen_types: BTreeMap<(&str, &str), RecordType> = BTreeMap::new();
    for (name, part) in files {
        for key in part.records.keys() {
            let org = name.organization.as_str();
            let registered = seen_types
                .get(&(org, key.id.as_str()))
                .copied()
                .or_else(|| registry.type_of(org, &key.id));
            match registered {
                Some(t) if t != key.record_type => flags.push(SessionFlag::TypeDrift {
                    organization: org.to_string(),
                    id: key.id.clone(),
                    registered: t,
                    found: key.record_type,
                }),
                Some(_) => {}
                None => {
                    seen_types.insert((org, key.id.as_str()), key.record_type);
                }
            }
        }
    }

    flags.sort();
    flags.dedup();
    let mut registered = 0;
    if flags.is_empty() {
        for (name, part) in files {
            for key in part.records.keys() {
                if registry.register(&name.organization, key.record_type, &key.id, &name.date) {
                    registered += 1;
                }
            }
        }
    }
    SessionReport { flags, registered }
}

/// Identifiers sent so far, with the date each was first seen. Entries are
/// only ever added.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdRegistry {
    pub entries: BTreeMap<(String, RecordType, String), PartialDate>,
    pub path: Option<PathBuf>,
}

impl IdRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads the registry at `path`; a missing file is an empty registry.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reg = IdRegistry {
            entries: BTreeMap::new(),
            path: Some(path.to_path_buf()),
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(reg),
            Err(e) => return Err(Error::io(path, e)),
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| Error::BadLine {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            let [org, ty, id, date] = cols[..] else {
                return Err(bad(format!("expected 4 tab-separated columns, got {}", cols.len())));
            };
            let ty = RecordType::from_token(ty).ok_or_else(|| bad(format!("unknown type {ty:?}")))?;
            let date = parse_partial_date(date).map_err(|e| bad(e.to_string()))?;
            reg.entries
                .insert((org.to_string(), ty, id.to_string()), date);
        }
        Ok(reg)
    }

    /// Writes the registry to its path via a temporary file and rename.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(self.to_text().as_bytes())
            .map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|((org, ty, id), date)| format!("{org}\t{}\t{id}\t{date}\n", ty.token()))
            .collect();
        lines.sort();
        lines.concat()
    }

    /// Adds an entry unless present; returns whether it was new.
    pub fn register(&mut self, org: &str, ty: RecordType, id: &str, date: &PartialDate) -> bool {
        let key = (org.to_string(), ty, id.to_string());
        if self.entries.contains_key(&key) {
            return false;
        }
        self.entries.insert(key, *date);
        true
    }

    /// Type an identifier was first registered under, for `org`.
    pub fn type_of(&self, org: &str, id: &str) -> Option<RecordType> {
        self.entries
            .iter()
            .filter(|((o, _, i), _)| o == org && i == id)
            .min_by_key(|(_, date)| date.earliest())
            .map(|((_, t, _), _)| *t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
