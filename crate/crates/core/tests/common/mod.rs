//! Seeded random generators for valid model values.
#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use cerif_core::model::{
    Contact, ExpertSkill, OrgUnit, OuOuRelation, PartialDate, Person, Project, ProjectStatus,
    Record, RecordKey, RecordType, Relation, Sex, TranslatedText, TranslationType,
};
use cerif_core::rdf::RecordSet;
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "research", "Forschung", "Außeninstitut", "CRIS", "data", "<tag>", "a&b", "\"quoted\"",
    "it's", "Ωmega", "naïve", "x>y", "--", "]]>", "Wien", "EU-project", "multimedia", "#1",
];

const LANGS: &[&str] = &["en", "de", "fr", "it", "sk", "hu"];

pub fn text<R: Rng>(r: &mut R, max_words: usize) -> String {
    let n = r.random_range(1..=max_words);
    (0..n)
        .map(|_| *WORDS.choose(r).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Words without `;`, for semicolon-list items.
pub fn item<R: Rng>(r: &mut R) -> String {
    text(r, 3)
}

pub fn ident<R: Rng>(r: &mut R) -> String {
    const CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-";
    let segments = r.random_range(1..=3);
    (0..segments)
        .map(|_| {
            let len = r.random_range(1..=6);
            (0..len)
                .map(|_| *CHARS.choose(r).unwrap() as char)
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join(".")
}

pub fn partial_date<R: Rng>(r: &mut R) -> PartialDate {
    let year = r.random_range(1000..=9999);
    match r.random_range(0..3) {
        0 => PartialDate::year_only(year).unwrap(),
        1 => PartialDate::new(year, Some(r.random_range(1..=12)), None).unwrap(),
        _ => full_date(r),
    }
}

pub fn full_date<R: Rng>(r: &mut R) -> PartialDate {
    PartialDate::full(
        r.random_range(1..=31),
        r.random_range(1..=12),
        r.random_range(1000..=9999),
    )
    .unwrap()
}

pub fn translated<R: Rng>(r: &mut R) -> TranslatedText {
    let tt = *[TranslationType::Original, TranslationType::Human, TranslationType::Machine]
        .choose(r)
        .unwrap();
    TranslatedText::new(LANGS.choose(r).unwrap(), tt, &text(r, 6))
}

fn texts<R: Rng>(r: &mut R, min: usize, max: usize) -> Vec<TranslatedText> {
    let n = r.random_range(min..=max);
    (0..n).map(|_| translated(r)).collect()
}

fn opt<R: Rng, T>(r: &mut R, f: impl FnOnce(&mut R) -> T) -> Option<T> {
    if r.random_bool(0.5) {
        Some(f(r))
    } else {
        None
    }
}

fn uri<R: Rng>(r: &mut R) -> String {
    format!("http://{}.example.org/{}", ident(r).to_lowercase(), r.random_range(0..100))
}

fn skills<R: Rng>(r: &mut R) -> Vec<ExpertSkill> {
    let n = r.random_range(0..3);
    (0..n)
        .map(|_| ExpertSkill {
            role: opt(r, |r| item(r)),
            skill: text(r, 4),
        })
        .collect()
}

fn contacts<R: Rng>(r: &mut R) -> Vec<Contact> {
    let n = r.random_range(0..3);
    (0..n)
        .map(|_| {
            let mut c = Contact {
                telephone: opt(r, |r| format!("+43 1 {}", r.random_range(1000..99999))),
                fax: opt(r, |r| format!("{}", r.random_range(1000..99999))),
                email: opt(r, |r| format!("{}@example.org", ident(r))),
                uri: opt(r, uri),
                address: opt(r, |r| text(r, 4)),
            };
            if c.is_empty() {
                c.email = Some("x@example.org".into());
            }
            c
        })
        .collect()
}

pub fn random_key<R: Rng>(r: &mut R) -> RecordKey {
    RecordKey::new(*RecordType::ALL.choose(r).unwrap(), ident(r))
}

fn relations<R: Rng>(r: &mut R, own: &RecordKey) -> Vec<Relation> {
    let n = r.random_range(0..3);
    let mut out: Vec<Relation> = Vec::new();
    for _ in 0..n {
        let target = random_key(r);
        if &target == own {
            continue;
        }
        let rel = Relation::new(own.clone(), target, &item(r), r.random_bool(0.3));
        if !out.contains(&rel) {
            out.push(rel);
        }
    }
    out
}

pub fn project<R: Rng>(r: &mut R, id: String) -> Project {
    let mut p = Project::new(id);
    p.status = Some(
        *[
            ProjectStatus::Execution,
            ProjectStatus::Accepted,
            ProjectStatus::Completed,
            ProjectStatus::Started,
        ]
        .choose(r)
        .unwrap(),
    );
    p.start = opt(r, partial_date);
    p.end = opt(r, partial_date);
    p.uri = opt(r, uri);
    let n = r.random_range(0..3);
    p.prize_awards = (0..n).map(|_| item(r)).collect();
    p.titles = texts(r, 1, 3);
    p.abstracts = texts(r, 1, 2);
    p.keywords = (0..r.random_range(0..3))
        .map(|_| {
            let items: Vec<String> = (0..r.random_range(1..4)).map(|_| item(r)).collect();
            let mut t = translated(r);
            t.text = items.join("; ");
            t
        })
        .collect();
    let key = RecordKey::new(RecordType::Project, p.id.clone());
    p.relations = relations(r, &key);
    p
}

pub fn person<R: Rng>(r: &mut R, id: String) -> Person {
    let mut p = Person::new(id, text(r, 2));
    if r.random_bool(0.7) {
        p.first_names = text(r, 2);
    }
    p.sex = opt(r, |r| if r.random_bool(0.5) { Sex::M } else { Sex::F });
    let n = r.random_range(0..3);
    p.prize_awards = (0..n).map(|_| item(r)).collect();
    p.uri = opt(r, uri);
    p.expert_skills = skills(r);
    p.contacts = contacts(r);
    let key = RecordKey::new(RecordType::Person, p.id.clone());
    p.relations = relations(r, &key);
    p
}

pub fn orgunit<R: Rng>(r: &mut R, id: String) -> OrgUnit {
    let mut o = OrgUnit::new(id);
    o.acronym = opt(r, ident);
    o.prize_award = opt(r, |r| text(r, 3));
    o.url = opt(r, uri);
    o.names = texts(r, 1, 3);
    o.descriptions = texts(r, 0, 2);
    o.ou_relations = (0..r.random_range(0..3))
        .map(|_| OuOuRelation {
            target: ident(r),
            role: item(r),
        })
        .collect();
    o.expert_skills = skills(r);
    o.contacts = contacts(r);
    let key = RecordKey::new(RecordType::OrgUnit, o.id.clone());
    o.relations = relations(r, &key);
    o
}

pub fn record<R: Rng>(r: &mut R) -> Record {
    let id = ident(r);
    match r.random_range(0..3) {
        0 => Record::Project(project(r, id)),
        1 => Record::Person(person(r, id)),
        _ => Record::OrgUnit(orgunit(r, id)),
    }
}

/// A valid set of up to `max` records with a few external relations.
pub fn record_set<R: Rng>(r: &mut R, max: usize) -> RecordSet {
    let mut rs = RecordSet::new();
    let n = r.random_range(0..=max);
    for _ in 0..n {
        let rec = record(r);
        if rs.get(&rec.key()).is_none() {
            rs.insert(rec).unwrap();
        }
    }
    for _ in 0..r.random_range(0..3) {
        let source = random_key(r);
        if rs.get(&source).is_some() {
            continue;
        }
        let target = match rs.records.keys().collect::<Vec<_>>().choose(r) {
            Some(k) if r.random_bool(0.7) => (*k).clone(),
            _ => random_key(r),
        };
        if source != target {
            rs.add_relation(Relation::new(source, target, &item(r), r.random_bool(0.5)));
        }
    }
    rs
}
