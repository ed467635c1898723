mod common;

use cerif_core::model::{PartialDate, ProjectStatus, Record, RecordKey, RecordType, Sex, TranslationType};
use cerif_core::rdf::{parse_document, serialize_document};
use cerif_core::validate::apply_discard_cascade;
use cerif_core::WarningKind;
use common::read_fixture;

fn only(rs: &cerif_core::RecordSet) -> &Record {
    assert_eq!(rs.len(), 1);
    rs.records.values().next().unwrap()
}

#[test]
fn project_example() {
    let (rs, _) = parse_document(&read_fixture("project.rdf")).unwrap();
    let Record::Project(p) = only(&rs) else {
        panic!("not a project")
    };
    assert_eq!(p.id, "E015-01-08");
    assert_eq!(p.status, Some(ProjectStatus::Execution));
    assert_eq!(p.start, Some(PartialDate::new(2000, Some(2), None).unwrap()));
    assert_eq!(p.end, Some(PartialDate::new(2001, Some(12), None).unwrap()));
    assert_eq!(p.uri.as_deref(), Some("http://arge.tuwien.ac.at"));
    assert!(p.prize_awards.is_empty());
    let shape = |v: &[cerif_core::TranslatedText]| {
        v.iter()
            .map(|t| (t.language.clone(), t.translation))
            .collect::<Vec<_>>()
    };
    let expected = vec![
        ("en".to_string(), TranslationType::Human),
        ("de".to_string(), TranslationType::Original),
    ];
    let mut titles = shape(&p.titles);
    let mut abstracts = shape(&p.abstracts);
    let mut want = expected.clone();
    titles.sort();
    abstracts.sort();
    want.sort();
    assert_eq!(titles, want);
    assert_eq!(abstracts, want);
    assert!(p.keywords.is_empty());
    assert!(apply_discard_cascade(&rs).is_clean());
}

#[test]
fn project_example_warns_on_empty_keyword_items() {
    let (_, warnings) = parse_document(&read_fixture("project.rdf")).unwrap();
    assert!(warnings.iter().any(|w| w.kind == WarningKind::EmptyListItem));
}

#[test]
fn person_example() {
    let (rs, warnings) = parse_document(&read_fixture("person.rdf")).unwrap();
    let Record::Person(p) = only(&rs) else {
        panic!("not a person")
    };
    assert_eq!(p.id, "273");
    assert_eq!(p.family_names, "Niedermayer");
    assert_eq!(p.first_names, "Walter");
    assert_eq!(p.sex, Some(Sex::M));
    let skills: Vec<&str> = p.expert_skills.iter().map(|s| s.skill.as_str()).collect();
    assert_eq!(skills, ["Multimedia", "CRIS"]);
    assert_eq!(p.contacts.len(), 1);
    assert_eq!(p.contacts[0].email.as_deref(), Some("walter@derpi.tuwien.ac.at"));
    let assumed = warnings
        .iter()
        .filter(|w| w.kind == WarningKind::AssumedNamespace)
        .count();
    assert_eq!(assumed, 1);
}

#[test]
fn orgunit_example() {
    let (rs, warnings) = parse_document(&read_fixture("orgunit.rdf")).unwrap();
    let Record::OrgUnit(o) = only(&rs) else {
        panic!("not an org unit")
    };
    assert_eq!(o.id, "TUWIEN.AUSENINSTITUT");
    assert_eq!(o.names.len(), 1);
    assert_eq!(o.names[0].language, "de");
    assert_eq!(o.names[0].translation, TranslationType::Original);
    assert!(warnings.iter().any(|w| w.kind == WarningKind::NormalizedCode));
    assert_eq!(o.ou_relations.len(), 1);
    assert_eq!(o.ou_relations[0].target, "TUWIEN");
    assert_eq!(o.ou_relations[0].role, "parent");
    assert_eq!(o.expert_skills.len(), 1);
    assert_eq!(o.expert_skills[0].skill, "CRIS-Current Research Information System");
}

#[test]
fn examples_reserialize_and_reparse() {
    for name in ["project.rdf", "person.rdf", "orgunit.rdf"] {
        let (rs, _) = parse_document(&read_fixture(name)).unwrap();
        let out = serialize_document(&rs).unwrap();
        let (back, warnings) = parse_document(&out).unwrap();
        assert_eq!(back.records, rs.records, "{name}");
        assert!(warnings.is_empty(), "{name}: {warnings:?}");
        assert_eq!(serialize_document(&back).unwrap(), out);
    }
}

#[test]
fn orgunit_parent_is_dangling_but_kept() {
    let (rs, _) = parse_document(&read_fixture("orgunit.rdf")).unwrap();
    let report = apply_discard_cascade(&rs);
    assert!(report.is_clean());
    assert!(report
        .warnings
        .iter()
        .any(|w| w.kind == WarningKind::DanglingReference));
    assert!(report
        .kept
        .get(&RecordKey::new(RecordType::OrgUnit, "TUWIEN.AUSENINSTITUT"))
        .is_some());
}
