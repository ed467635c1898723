//! `cerif-rdf`: validate, convert, package, gather and query CERIF-RDF data.
//!
//! Exit status: 0 clean, 1 findings (discarded records, skipped input,
//! flagged sessions), 2 hard failure (unreadable or unparseable input).
//! Data goes to files or stdout, diagnostics to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cerif_core::exchange::{check_session, parse_name, plan_session, ExchangeName, IdRegistry, SessionMode};
use cerif_core::html::{extract_rdf_with, render_html_with};
use cerif_core::legacy::{decode, map_record, parse_sgml};
use cerif_core::model::{lint_record, PartialDate};
use cerif_core::rdf::{parse_document_with, serialize_document_with, CodecOptions, RecordSet};
use cerif_core::store::{query, EquivalenceMap, Provenance, ProvenanceKind, Store, TriplePattern};
use cerif_core::validate::{apply_discard_cascade, DiscardReport};
use cerif_core::{Error, Warning};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Status {
    Clean = 0,
    Findings = 1,
    /// Already reported; only used where one bad input must not stop the rest.
    Failed = 2,
}

/// A hard failure: reported on stderr, exit status 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<Status, Failure>;

#[derive(Parser)]
#[command(name = "cerif-rdf", version, about = "CERIF-RDF exchange toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    All,
    PerObject,
}

impl From<Mode> for SessionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::All => SessionMode::All,
            Mode::PerObject => SessionMode::PerObject,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check CERIF-RDF files and print the discard report.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Convert tagged legacy records into per-object exchange files.
    ConvertSgml {
        path: PathBuf,
        #[arg(long)]
        org: String,
        /// Export date, DD.MM.YYYY.
        #[arg(long, value_parser = full_date)]
        date: PartialDate,
        #[arg(long)]
        out: PathBuf,
        /// Character encoding of the input.
        #[arg(long, default_value = "utf-8")]
        encoding: String,
    },
    /// Pull embedded CERIF-RDF out of HTML pages.
    Extract {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Write one `<page>.rdf` per page here instead of one document to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render each record of a CERIF-RDF file as an HTML page with the data embedded.
    Render {
        path: PathBuf,
        /// Write `<type>.<id>.html` files here instead of printing the pages.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split or bundle records into exchange-named files.
    Package {
        path: PathBuf,
        #[arg(long)]
        org: String,
        #[arg(long, value_parser = full_date)]
        date: PartialDate,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "per-object")]
        mode: Mode,
        /// Identifier registry updated when the session is clean.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Check a received session of exchange files.
    CheckSession {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Merge exchange files and HTML pages into a store directory.
    Gather {
        #[arg(long)]
        store: PathBuf,
        /// Fetch date for inputs whose name carries none, DD.MM.YYYY.
        #[arg(long, value_parser = full_date)]
        date: Option<PartialDate>,
        inputs: Vec<PathBuf>,
    },
    /// Match one triple pattern, e.g. "(tuwien, rector, ?x)", against a store.
    Query {
        #[arg(long)]
        store: PathBuf,
        /// Term equivalence file.
        #[arg(long)]
        eq: Option<PathBuf>,
        pattern: String,
    },
}

fn full_date(s: &str) -> Result<PartialDate, String> {
    let d: PartialDate = s.parse().map_err(|e: Error| e.to_string())?;
    if d.is_full() {
        Ok(d)
    } else {
        Err(format!("{s:?} is not a full DD.MM.YYYY date"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = CodecOptions::from_env();
    let outcome = match cli.command {
        Command::Validate { paths } => validate(&paths, &opts),
        Command::ConvertSgml { path, org, date, out, encoding } => {
            convert_sgml(&path, &org, &date, &out, &encoding, &opts)
        }
        Command::Extract { paths, out } => extract(&paths, out.as_deref(), &opts),
        Command::Render { path, out } => render(&path, out.as_deref(), &opts),
        Command::Package { path, org, date, out, mode, registry } => {
            package(&path, &org, &date, &out, mode.into(), registry.as_deref(), &opts)
        }
        Command::CheckSession { paths, registry } => check(&paths, registry.as_deref(), &opts),
        Command::Gather { store, date, inputs } => gather(&store, date.as_ref(), &inputs, &opts),
        Command::Query { store, eq, pattern } => run_query(&store, eq.as_deref(), &pattern),
    };
    match outcome {
        Ok(status) => ExitCode::from(status as u8),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_rdf(path: &Path, opts: &CodecOptions) -> Result<RecordSet, Failure> {
    let text = read_text(path)?;
    let (rs, warnings) =
        parse_document_with(&text, opts).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    warn_all(path, &warnings);
    Ok(rs)
}

fn warn_all(context: &Path, warnings: &[Warning]) {
    for w in warnings {
        eprintln!("{}: {w}", context.display());
    }
}

/// Joins a generated file name onto `dir`, refusing anything that would
/// land outside it.
fn output_path(dir: &Path, name: &str) -> Result<PathBuf, String> {
    if name.is_empty() || name.starts_with('.') || name.contains(['/', '\\', '\0']) {
        return Err(format!("refusing to write file named {name:?}"));
    }
    Ok(dir.join(name))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<Status, Failure> {
    let path = match output_path(dir, name) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("{msg}");
            return Ok(Status::Findings);
        }
    };
    fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    fs::write(&path, contents).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(Status::Clean)
}

/// Prints the discard report and per-record lint; returns the kept records.
fn screen(context: &Path, rs: &RecordSet) -> (RecordSet, Status) {
    let report: DiscardReport = apply_discard_cascade(rs);
    warn_all(context, &report.warnings);
    for r in report.kept.records.values() {
        warn_all(context, &lint_record(r, None));
    }
    print!("{}", report.to_lines());
    let status = if report.is_clean() { Status::Clean } else { Status::Findings };
    (report.kept, status)
}

fn validate(paths: &[PathBuf], opts: &CodecOptions) -> Outcome {
    let mut worst = Status::Clean;
    for path in paths {
        let status = match read_rdf(path, opts) {
            Ok(rs) => screen(path, &rs).1,
            Err(Failure(msg)) => {
                eprintln!("error: {msg}");
                Status::Failed
            }
        };
        worst = worst.max(status);
    }
    Ok(worst)
}

fn convert_sgml(
    path: &Path,
    org: &str,
    date: &PartialDate,
    out: &Path,
    encoding: &str,
    opts: &CodecOptions,
) -> Outcome {
    let bytes = fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let text = decode(&bytes, encoding)?;
    let legacy = parse_sgml(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let mut status = Status::Clean;
    let mut rs = RecordSet::new();
    for lr in &legacy {
        let mapped = match map_record(lr, date) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("{}:{}: skipped record: {e}", path.display(), lr.line);
                status = Status::Findings;
                continue;
            }
        };
        warn_all(path, &mapped.warnings);
        for record in mapped.into_records() {
            match rs.get(&record.key()) {
                None => rs.insert(record)?,
                Some(held) if held == &record => {}
                Some(_) => {
                    eprintln!(
                        "{}:{}: {} differs from an earlier record with the same key; keeping the first",
                        path.display(),
                        lr.line,
                        record.key()
                    );
                    status = Status::Findings;
                }
            }
        }
    }
    let (kept, screened) = screen(path, &rs);
    let written = write_session(&kept, org, date, out, SessionMode::PerObject, opts)?;
    Ok(status.max(screened).max(written))
}

fn write_session(
    rs: &RecordSet,
    org: &str,
    date: &PartialDate,
    out: &Path,
    mode: SessionMode,
    opts: &CodecOptions,
) -> Outcome {
    if rs.is_empty() {
        return Ok(Status::Clean);
    }
    let files = plan_session(rs, org, date, mode)?;
    let mut status = Status::Clean;
    for (name, part) in &files {
        status = status.max(write_file(out, &name.to_string(), &serialize_document_with(part, opts)?)?);
    }
    Ok(status)
}

fn extract(paths: &[PathBuf], out: Option<&Path>, opts: &CodecOptions) -> Outcome {
    let mut status = Status::Clean;
    let mut all = RecordSet::new();
    for path in paths {
        let page = read_text(path)?;
        let result = extract_rdf_with(&page, None, opts);
        if !result.warnings.is_empty() {
            status = Status::Findings;
        }
        warn_all(path, &result.warnings);
        let mut rs = RecordSet::new();
        for doc in &result.documents {
            warn_all(path, &doc.warnings);
            for (prefix, uri) in &doc.records.declared_namespaces {
                rs.declared_namespaces.entry(prefix.clone()).or_insert_with(|| uri.clone());
            }
            status = status.max(absorb(path, &mut rs, &doc.records)?);
        }
        match out {
            Some(dir) => {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                status = status.max(write_file(dir, &format!("{stem}.rdf"), &serialize_document_with(&rs, opts)?)?);
            }
            None => {
                status = status.max(absorb(path, &mut all, &rs)?);
            }
        }
    }
    if out.is_none() {
        print!("{}", serialize_document_with(&all, opts)?);
    }
    Ok(status)
}

/// Adds `from` into `into`; a second, different record under one key is
/// reported and dropped.
fn absorb(context: &Path, into: &mut RecordSet, from: &RecordSet) -> Outcome {
    let mut status = Status::Clean;
    for record in from.records.values() {
        match into.get(&record.key()) {
            None => into.insert(record.clone())?,
            Some(held) if held == record => {}
            Some(_) => {
                eprintln!(
                    "{}: conflicting descriptions of {}; keeping the first",
                    context.display(),
                    record.key()
                );
                status = Status::Findings;
            }
        }
    }
    for rel in &from.external_relations {
        into.add_relation(rel.clone());
    }
    Ok(status)
}

fn render(path: &Path, out: Option<&Path>, opts: &CodecOptions) -> Outcome {
    let rs = read_rdf(path, opts)?;
    let mut status = Status::Clean;
    let mut stdout = std::io::stdout().lock();
    for record in rs.records.values() {
        let page = match render_html_with(record, opts) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{}: {}: not rendered: {e}", path.display(), record.key());
                status = Status::Findings;
                continue;
            }
        };
        match out {
            Some(dir) => {
                let name = format!("{}.{}.html", record.record_type(), record.id());
                status = status.max(write_file(dir, &name, &page)?);
            }
            None => stdout
                .write_all(page.as_bytes())
                .map_err(|e| Failure(format!("stdout: {e}")))?,
        }
    }
    Ok(status)
}

fn package(
    path: &Path,
    org: &str,
    date: &PartialDate,
    out: &Path,
    mode: SessionMode,
    registry: Option<&Path>,
    opts: &CodecOptions,
) -> Outcome {
    let rs = read_rdf(path, opts)?;
    let (kept, mut status) = screen(path, &rs);
    if let Some(reg_path) = registry {
        if !kept.is_empty() {
            let files = plan_session(&kept, org, date, mode)?;
            status = status.max(session_report(&files, reg_path)?);
        }
    }
    Ok(status.max(write_session(&kept, org, date, out, mode, opts)?))
}

/// Runs the session checks against the registry at `path`, saving it when
/// the session is clean.
fn session_report(files: &[(ExchangeName, RecordSet)], path: &Path) -> Outcome {
    let mut registry = IdRegistry::load(path)?;
    let report = check_session(files, &mut registry);
    if report.is_clean() {
        registry.save()?;
        Ok(Status::Clean)
    } else {
        for flag in &report.flags {
            println!("FLAG {flag}");
        }
        Ok(Status::Findings)
    }
}

fn exchange_file_name(path: &Path) -> Option<&str> {
    path.file_name().and_then(|n| n.to_str())
}

fn check(paths: &[PathBuf], registry: Option<&Path>, opts: &CodecOptions) -> Outcome {
    let mut files = Vec::with_capacity(paths.len());
    for path in paths {
        let name = exchange_file_name(path)
            .ok_or_else(|| Failure(format!("{}: no file name", path.display())))?;
        let name = parse_name(name)?;
        files.push((name, read_rdf(path, opts)?));
    }
    match registry {
        Some(reg) => session_report(&files, reg),
        None => {
            let report = check_session(&files, &mut IdRegistry::new());
            for flag in &report.flags {
                println!("FLAG {flag}");
            }
            Ok(if report.is_clean() { Status::Clean } else { Status::Findings })
        }
    }
}

fn gather(store_dir: &Path, date: Option<&PartialDate>, inputs: &[PathBuf], opts: &CodecOptions) -> Outcome {
    if inputs.is_empty() {
        return Ok(Status::Clean);
    }
    let mut store = Store::load(store_dir)?;
    let mut status = Status::Clean;
    for path in inputs {
        let file_name = exchange_file_name(path)
            .ok_or_else(|| Failure(format!("{}: no file name", path.display())))?;
        let is_html = matches!(
            path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
            Some("html" | "htm")
        );
        let (rs, prov) = if is_html {
            let page = read_text(path)?;
            let result = extract_rdf_with(&page, None, opts);
            if !result.warnings.is_empty() {
                status = Status::Findings;
            }
            warn_all(path, &result.warnings);
            let mut rs = RecordSet::new();
            for doc in &result.documents {
                warn_all(path, &doc.warnings);
                status = status.max(absorb(path, &mut rs, &doc.records)?);
            }
            (rs, extracted_provenance(file_name, date)?)
        } else {
            let rs = read_rdf(path, opts)?;
            let prov = match parse_name(file_name) {
                Ok(name) => Provenance::from_exchange_name(&name, file_name)?,
                Err(_) => extracted_provenance(file_name, date)?,
            };
            (rs, prov)
        };
        let (kept, screened) = screen(path, &rs);
        status = status.max(screened);
        warn_all(path, &store.merge(&kept, &prov));
    }
    store.save(store_dir)?;
    Ok(status)
}

fn extracted_provenance(source: &str, date: Option<&PartialDate>) -> Result<Provenance, Failure> {
    let date = date.ok_or_else(|| {
        Failure(format!("{source}: name carries no date; pass --date DD.MM.YYYY"))
    })?;
    Ok(Provenance::new(source, *date, ProvenanceKind::Extracted)?)
}

fn run_query(store_dir: &Path, eq: Option<&Path>, pattern: &str) -> Outcome {
    let pattern: TriplePattern = pattern.parse()?;
    let store = Store::load(store_dir)?;
    let eq = match eq {
        Some(path) => EquivalenceMap::load(path)?,
        None => EquivalenceMap::new(),
    };
    for binding in query(&store, &pattern, &eq) {
        if binding.vars.is_empty() {
            println!("{}", binding.triple);
        } else {
            let vars: Vec<String> = binding.vars.iter().map(|(k, v)| format!("?{k}={v}")).collect();
            println!("{}", vars.join("\t"));
        }
    }
    Ok(Status::Clean)
}

