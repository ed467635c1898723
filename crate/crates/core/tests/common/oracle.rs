//! Reference implementation of the discard cascade.

use std::collections::BTreeSet;

use cerif_core::model::{Record, RecordKey, Relation};
use cerif_core::rdf::RecordSet;
use cerif_core::validate::{apply_discard_cascade, validate_record, DiscardReason};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Up to 12 records, some individually invalid, wired with random
/// mandatory and optional relations (including to absent records).
pub fn wired_set<R: Rng>(r: &mut R) -> RecordSet {
    let mut records: Vec<Record> = Vec::new();
    for _ in 0..r.random_range(0..=12) {
        let mut rec = super::record(r);
        rec.relations_mut().clear();
        if r.random_bool(0.25) {
            match &mut rec {
                Record::Project(p) => p.titles.clear(),
                Record::Person(p) => p.family_names.clear(),
                Record::OrgUnit(o) => o.names.clear(),
            }
        }
        if records.iter().all(|x| x.key() != rec.key()) {
            records.push(rec);
        }
    }
    let keys: Vec<RecordKey> = records.iter().map(Record::key).collect();
    for rec in records.iter_mut() {
        let own = rec.key();
        for _ in 0..r.random_range(0..4) {
            let target = if r.random_bool(0.9) && !keys.is_empty() {
                keys.choose(r).unwrap().clone()
            } else {
                super::random_key(r)
            };
            if target == own {
                continue;
            }
            let rel = Relation::new(own.clone(), target, "link", r.random_bool(0.6));
            if !rec.relations().contains(&rel) {
                rec.relations_mut().push(rel);
            }
        }
    }
    RecordSet::from_records(records).unwrap()
}

/// Iterate-until-stable reference: discard invalid records, then keep
/// discarding any record with a mandatory relation to a discarded one.
pub fn oracle(rs: &RecordSet) -> BTreeSet<RecordKey> {
    let mut gone: BTreeSet<RecordKey> = rs
        .records
        .iter()
        .filter(|(_, r)| !validate_record(r).is_empty())
        .map(|(k, _)| k.clone())
        .collect();
    loop {
        let before = gone.len();
        for (k, r) in &rs.records {
            if r.relations().iter().any(|rel| rel.mandatory && gone.contains(&rel.target)) {
                gone.insert(k.clone());
            }
        }
        if gone.len() == before {
            return gone;
        }
    }
}

pub fn agrees_with_oracle(rs: &RecordSet) -> Result<(), String> {
    let report = apply_discard_cascade(rs);
    let expected = oracle(rs);
    if report.discarded_keys() != expected {
        return Err(format!(
            "discarded {:?}, oracle {:?}",
            report.discarded_keys(),
            expected
        ));
    }
    let kept: BTreeSet<RecordKey> = report.kept.records.keys().cloned().collect();
    let all: BTreeSet<RecordKey> = rs.records.keys().cloned().collect();
    if kept != all.difference(&expected).cloned().collect() {
        return Err("kept set is not the complement of the discarded set".into());
    }
    for (key, reason) in &report.discarded {
        if let DiscardReason::CascadeFrom(cause) = reason {
            let holder = &rs.records[key];
            let ok = holder
                .relations()
                .iter()
                .any(|r| r.mandatory && &r.target == cause)
                && expected.contains(cause);
            if !ok {
                return Err(format!("{key} blames {cause}, which it does not depend on"));
            }
        }
    }
    Ok(())
}
