//! CERIF-RDF toolkit: encode, decode, validate, convert, package and gather
//! research-information records (projects, persons, organisation units).

pub mod error;
pub mod exchange;
pub mod html;
pub mod legacy;
pub mod model;
pub mod rdf;
pub mod store;
pub mod validate;

pub use error::{Error, Result, Warning, WarningKind};
pub use model::{
    FieldValue, OrgUnit, PartialDate, Person, Project, ProjectStatus, Record, RecordKey, RecordType, Relation,
    TranslatedText, TranslationType,
};
pub use rdf::{parse_document, serialize_document, RecordSet};
pub use validate::{apply_discard_cascade, validate_record, DiscardReport, Violation};
pub use legacy::{map_record, parse_sgml, LegacyRecord, MappedRecord};
pub use html::{extract_rdf, render_html, ExtractionResult};
pub use exchange::{
    check_session, format_name, merge_session, parse_name, plan_session, ExchangeKind, ExchangeName,
    IdRegistry, SessionFlag, SessionMode, SessionReport,
};
pub use store::{
    query, to_triples, Binding, EquivalenceMap, PatternTerm, Provenance, ProvenanceKind, Store, Term,
    Triple, TriplePattern,
};
