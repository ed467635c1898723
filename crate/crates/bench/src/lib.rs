//! Deterministic workloads shared by the benchmarks.

use cerif_core::model::{
    ExpertSkill, OrgUnit, PartialDate, Person, Project, ProjectStatus, Record, RecordKey,
    RecordType, Relation, TranslatedText, TranslationType,
};
use cerif_core::rdf::RecordSet;

/// `n` projects, `n` persons and `n / 4 + 1` units, wired so that every
/// tenth project lacks a title and drags its dependants down with it.
pub fn synthetic_set(n: usize) -> RecordSet {
    let units = n / 4 + 1;
    let mut rs = RecordSet::new();
    for u in 0..units {
        let mut o = OrgUnit::new(format!("U{u}"));
        o.names.push(TranslatedText::new("de", TranslationType::Original, &format!("Institut {u}")));
        o.names.push(TranslatedText::new("en", TranslationType::Human, &format!("Institute {u}")));
        o.expert_skills.push(ExpertSkill { role: None, skill: "CRIS".into() });
        if u > 0 {
            o.relations.push(Relation::new(
                RecordKey::new(RecordType::OrgUnit, format!("U{u}")),
                RecordKey::new(RecordType::OrgUnit, "U0"),
                "parent",
                true,
            ));
        }
        rs.insert(Record::OrgUnit(o)).unwrap();
    }
    for i in 0..n {
        let mut p = Person::new(format!("P{i}"), format!("Family{i}"));
        p.first_names = "Walter".into();
        p.relations.push(Relation::new(
            RecordKey::new(RecordType::Person, format!("P{i}")),
            RecordKey::new(RecordType::OrgUnit, format!("U{}", i % units)),
            "member",
            false,
        ));
        rs.insert(Record::Person(p)).unwrap();

        let mut pr = Project::new(format!("E{i:04}"));
        pr.status = Some(ProjectStatus::Execution);
        pr.start = Some(PartialDate::new(2000, Some(2), None).unwrap());
        pr.end = Some(PartialDate::new(2001, Some(12), None).unwrap());
        if i % 10 != 0 {
            pr.titles.push(TranslatedText::new("en", TranslationType::Human, &format!("Project {i} & co")));
            pr.titles.push(TranslatedText::new("de", TranslationType::Original, &format!("Projekt {i}")));
        }
        pr.abstracts.push(TranslatedText::new("en", TranslationType::Human, "A study of <research> data exchange."));
        let key = RecordKey::new(RecordType::Project, format!("E{i:04}"));
        pr.relations.push(Relation::new(key.clone(), RecordKey::new(RecordType::Person, format!("P{i}")), "leader", false));
        if i > 0 {
            pr.relations.push(Relation::new(
                key,
                RecordKey::new(RecordType::Project, format!("E{:04}", i - 1)),
                "sub-project-of",
                i % 3 == 0,
            ));
        }
        rs.insert(Record::Project(pr)).unwrap();
    }
    rs
}
