mod common;

use std::collections::{BTreeMap, BTreeSet};

use cerif_core::exchange::parse_name;
use cerif_core::model::{PartialDate, Record, RecordKey, RecordType};
use cerif_core::rdf::{parse_document, RecordSet};
use cerif_core::store::{
    query, query_triples, to_triples, EquivalenceMap, Provenance, ProvenanceKind, Store, Term,
    Triple, TriplePattern,
};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

fn triples_of(name: &str) -> BTreeSet<Triple> {
    let (rs, _) = parse_document(&common::read_fixture(name)).unwrap();
    let mut s = Store::new();
    let prov = Provenance::new(name, PartialDate::full(1, 1, 2001).unwrap(), ProvenanceKind::All).unwrap();
    s.merge(&rs, &prov);
    to_triples(&s)
}

#[test]
fn project_example_triples() {
    // status, start, end, uri; two titles; two abstracts.
    let t = triples_of("project.rdf");
    assert_eq!(t.len(), 4 + 2 + 2);
    let preds: BTreeSet<&str> = t.iter().map(|t| t.predicate.as_str()).collect();
    assert_eq!(
        preds,
        BTreeSet::from(["proj_status", "proj_startdate", "proj_enddate", "proj_uri", "proj_title", "proj_abstract"])
    );
}

#[test]
fn orgunit_parent_triple() {
    let t = triples_of("orgunit.rdf");
    assert!(t.contains(&Triple {
        subject: RecordKey::new(RecordType::OrgUnit, "TUWIEN.AUSENINSTITUT"),
        predicate: "parent".into(),
        object: Term::Node(RecordKey::new(RecordType::OrgUnit, "TUWIEN")),
    }));
}

#[test]
fn change_file_beats_annual_snapshot() {
    let mut r = common::rng(11);
    let mut old = common::project(&mut r, "AURIS".into());
    let mut new = old.clone();
    old.uri = Some("http://old.example.org".into());
    new.uri = Some("http://new.example.org".into());
    let annual = parse_name("ANNUAL.TUWIEN.2001.rdf").unwrap();
    let change = parse_name("CHANGE.TUWIEN.PROJECT.AURIS.01.05.2001.rdf").unwrap();
    let pa = Provenance::from_exchange_name(&annual, "ANNUAL.TUWIEN.2001.rdf").unwrap();
    let pc = Provenance::from_exchange_name(&change, "CHANGE.TUWIEN.PROJECT.AURIS.01.05.2001.rdf").unwrap();
    let a = RecordSet::from_records([Record::Project(old)]).unwrap();
    let c = RecordSet::from_records([Record::Project(new.clone())]).unwrap();
    for order in [[(&a, &pa), (&c, &pc)], [(&c, &pc), (&a, &pa)]] {
        let mut s = Store::new();
        for (rs, p) in order {
            s.merge(rs, p);
        }
        let key = RecordKey::new(RecordType::Project, "AURIS");
        assert_eq!(s.current[&key].0, Record::Project(new.clone()));
        assert_eq!(s.current[&key].1.kind, ProvenanceKind::Change);
        assert_eq!(s.versions(&key).len(), 2);
    }
}

/// A handful of sources, each a set over a small shared key space.
fn inputs<R: Rng>(r: &mut R, n: usize) -> Vec<(RecordSet, Provenance)> {
    let ids = ["a", "b", "c", "d"];
    let sources = ["s1", "s2", "s3"];
    (0..n)
        .map(|_| {
            let mut rs = RecordSet::new();
            for id in ids {
                if r.random_bool(0.6) {
                    let rec = Record::OrgUnit(common::orgunit(r, id.to_string()));
                    rs.insert(rec).unwrap();
                }
            }
            let date = PartialDate::full(r.random_range(1..=3), 1, 2001).unwrap();
            let prov = Provenance::new(sources.choose(r).unwrap(), date, ProvenanceKind::All).unwrap();
            (rs, prov)
        })
        .collect()
}

/// Reference: the winner per key is the maximum version under
/// (date, source, kind, record).
fn expected_current(inputs: &[(RecordSet, Provenance)]) -> BTreeMap<RecordKey, (Record, Provenance)> {
    let mut best: BTreeMap<RecordKey, (Record, Provenance)> = BTreeMap::new();
    for (rs, p) in inputs {
        for (k, r) in &rs.records {
            let rank = |r: &Record, p: &Provenance| (p.fetched.earliest(), p.source.clone(), p.kind, r.clone());
            let replace = match best.get(k) {
                None => true,
                Some((br, bp)) => rank(r, p) > rank(br, bp),
            };
            if replace {
                best.insert(k.clone(), (r.clone(), p.clone()));
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn merge_order_does_not_matter(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut ins = inputs(&mut r, 4);
        let expected = expected_current(&ins);
        let total = ins
            .iter()
            .flat_map(|(rs, p)| rs.records.values().map(move |r| (r.clone(), p.clone())))
            .collect::<BTreeSet<_>>()
            .len();
        for _ in 0..4 {
            ins.shuffle(&mut r);
            let mut s = Store::new();
            for (rs, p) in &ins {
                s.merge(rs, p);
            }
            prop_assert_eq!(&s.current, &expected);
            prop_assert_eq!(s.version_count(), total);
        }
    }

    #[test]
    fn equivalence_only_adds_bindings(seed in any::<u64>(), class in prop::collection::btree_set("[a-z]{1,3}", 1..4)) {
        let mut r = common::rng(seed);
        let mut s = Store::new();
        let prov = Provenance::new("x", PartialDate::full(1, 1, 2001).unwrap(), ProvenanceKind::All).unwrap();
        s.merge(&common::record_set(&mut r, 6), &prov);
        let triples = to_triples(&s);
        let pick = |r: &mut rand::rngs::StdRng| -> String {
            match triples.iter().collect::<Vec<_>>().choose(r) {
                Some(t) if r.random_bool(0.7) => t.predicate.clone(),
                _ => "?".into(),
            }
        };
        let pattern = TriplePattern::new(&pick(&mut r), &pick(&mut r), "?o");
        let empty = query_triples(&triples, &pattern, &EquivalenceMap::new());
        let mut eq = EquivalenceMap::new();
        let mut members: Vec<String> = class.into_iter().collect();
        if let Some(t) = triples.iter().next() {
            members.push(t.predicate.clone());
        }
        eq.add_class(members.clone());
        let small = query_triples(&triples, &pattern, &eq);
        members.push("rector".into());
        let mut bigger = eq.clone();
        bigger.add_class(members);
        let large = query_triples(&triples, &pattern, &bigger);
        prop_assert!(empty.iter().all(|b| small.contains(b)));
        prop_assert!(small.iter().all(|b| large.contains(b)));
    }

    #[test]
    fn distinct_records_give_distinct_triples(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let a = common::record(&mut r);
        let b = common::record(&mut r);
        prop_assume!(a != b);
        let prov = Provenance::new("x", PartialDate::full(1, 1, 2001).unwrap(), ProvenanceKind::All).unwrap();
        let store_of = |rec: &Record| {
            let mut s = Store::new();
            s.merge(&RecordSet::from_records([rec.clone()]).unwrap(), &prov);
            to_triples(&s)
        };
        prop_assert_ne!(store_of(&a), store_of(&b));
    }

    #[test]
    fn persisted_store_reloads(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut s = Store::new();
        for (rs, p) in inputs(&mut r, 3) {
            s.merge(&rs, &p);
        }
        let dir = tempfile::tempdir().unwrap();
        s.save(dir.path()).unwrap();
        prop_assert_eq!(Store::load(dir.path()).unwrap(), s);
    }
}

#[test]
fn remerging_a_source_changes_nothing() {
    let mut r = common::rng(5);
    let mut s = Store::new();
    let ins = inputs(&mut r, 3);
    for (rs, p) in &ins {
        s.merge(rs, p);
    }
    let before = s.clone();
    for (rs, p) in &ins {
        s.merge(rs, p);
    }
    assert_eq!(s, before);
}

#[test]
fn toy_query_with_and_without_map() {
    let (store, eq) = toy();
    let p: TriplePattern = "(tuwien, rector, ?x)".parse().unwrap();
    assert!(query(&store, &p, &EquivalenceMap::new()).is_empty());
    let got = query(&store, &p, &eq);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].vars["x"], Term::Node(RecordKey::new(RecordType::Person, "skalicky")));
}

fn toy() -> (Store, EquivalenceMap) {
    let doc = r#"<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
  xmlns:cerif="http://derpi.tuwien.ac.at/~andrei/cerif-rdf#">
  <cerif:orgunit rdf:ID="tuwien">
    <cerif:orgunit.orgunit_names><rdf:Bag><rdf:li><cerif:orgunit.orgunit_name>
      <cerif:orgunit.oun.language>en</cerif:orgunit.oun.language>
      <cerif:orgunit.oun.translation>H</cerif:orgunit.oun.translation>
      <cerif:orgunit.oun.name>Vienna University of Technology</cerif:orgunit.oun.name>
    </cerif:orgunit.orgunit_name></rdf:li></rdf:Bag></cerif:orgunit.orgunit_names>
    <cerif:relations><rdf:Bag><rdf:li><cerif:relation>
      <cerif:rel.target.person rdf:resource="skalicky"/>
      <cerif:rel.role>Rektor</cerif:rel.role>
    </cerif:relation></rdf:li></rdf:Bag></cerif:relations>
  </cerif:orgunit>
  <cerif:person rdf:ID="skalicky">
    <cerif:person.per_family_names>Skalicky</cerif:person.per_family_names>
  </cerif:person>
</rdf:RDF>"#;
    let (rs, _) = parse_document(doc).unwrap();
    assert_eq!(rs.len(), 2);
    let mut s = Store::new();
    let prov = Provenance::new("toy", PartialDate::full(1, 1, 2001).unwrap(), ProvenanceKind::Extracted).unwrap();
    s.merge(&rs, &prov);
    (s, EquivalenceMap::parse("rector ≡ Rektor\n"))
}
