//! Snapshot loading and export.
//!
//! A snapshot is a directory of headerless, tab-separated UTF-8 files using
//! `\N` for null:
//!
//! | file               | columns                                                                  |
//! |--------------------|--------------------------------------------------------------------------|
//! | `papers.tsv`       | Id, Ti, DN, Y, D, CC, ECC, JId, CId, volume, issue, first_page, last_page, DOI |
//! | `paper_authors.tsv`| PaperId, AuId, AuN, AfId, AfN, position                                  |
//! | `references.tsv`   | PaperId, RefId                                                           |
//! | `paper_fos.tsv`    | PaperId, FId                                                             |
//! | `journals.tsv`     | JId, JN, ISSN                                                            |
//! | `venues.tsv`       | CId, CN, DN, SN                                                          |
//! | `fos.tsv`          | FId, FN, level (`L0`..`L3`)                                              |
//! | `fos_hierarchy.tsv`| ChildFId, ParentFId                                                      |
//!
//! Only `papers.tsv` is required. A JSON fixture is a single object whose
//! keys are the file stems (`papers`, `paper_authors`, ...) holding arrays of
//! objects keyed by the column names above; paper objects may additionally
//! carry `description` and `sources` (`[{"format", "url"}]`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, IngestError};
use crate::graph::{
    is_valid_doi, AcademicGraph, Authorship, CitationMode, EntityId, ExtendedMeta, FieldLevel,
    FieldOfStudyRecord, GraphBuilder, JournalRecord, PaperRecord, Source, VenueRecord, MAX_YEAR,
    MIN_YEAR,
};
use crate::normalize::{normalize_with_report, NormalizedText};

pub const NULL: &str = "\\N";

#[derive(Debug, Clone)]
pub struct SnapshotManifest {
    pub dir: PathBuf,
    pub strict: bool,
    pub citation_mode: CitationMode,
}

impl SnapshotManifest {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            strict: false,
            citation_mode: CitationMode::Stored,
        }
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn citation_mode(mut self, mode: CitationMode) -> Self {
        self.citation_mode = mode;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FileCounts {
    pub loaded: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub files: BTreeMap<String, FileCounts>,
    pub papers: usize,
    pub journals: usize,
    pub venues: usize,
    pub fields: usize,
    pub dangling_references: usize,
    pub normalization_warnings: usize,
    pub hierarchy_flags: usize,
    pub citation_counts_changed: usize,
    pub warnings: Vec<String>,
}

impl LoadReport {
    pub fn rows_dropped(&self) -> usize {
        self.files.values().map(|c| c.dropped).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRow {
    pub format: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRow {
    #[serde(rename = "Id")]
    pub id: u64,
    #[serde(rename = "Ti")]
    pub title: String,
    #[serde(rename = "DN", default)]
    pub display_name: Option<String>,
    #[serde(rename = "Y", default)]
    pub year: Option<i32>,
    #[serde(rename = "D", default)]
    pub date: Option<String>,
    #[serde(rename = "CC", default)]
    pub citation_count: u64,
    #[serde(rename = "ECC", default)]
    pub estimated_citation_count: Option<u64>,
    #[serde(rename = "JId", default)]
    pub journal_id: Option<u64>,
    #[serde(rename = "CId", default)]
    pub venue_id: Option<u64>,
    #[serde(default)]
    pub volume: Option<String>,
    #[serde(default)]
    pub issue: Option<String>,
    #[serde(default)]
    pub first_page: Option<String>,
    #[serde(default)]
    pub last_page: Option<String>,
    #[serde(rename = "DOI", default)]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRow {
    #[serde(rename = "PaperId")]
    pub paper_id: u64,
    #[serde(rename = "AuId")]
    pub author_id: u64,
    #[serde(rename = "AuN")]
    pub author_name: String,
    #[serde(rename = "AfId", default)]
    pub affiliation_id: Option<u64>,
    #[serde(rename = "AfN", default)]
    pub affiliation_name: Option<String>,
    pub position: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    #[serde(rename = "PaperId")]
    pub paper_id: u64,
    #[serde(rename = "RefId")]
    pub ref_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperFosRow {
    #[serde(rename = "PaperId")]
    pub paper_id: u64,
    #[serde(rename = "FId")]
    pub field_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRow {
    #[serde(rename = "JId")]
    pub id: u64,
    #[serde(rename = "JN")]
    pub name: String,
    #[serde(rename = "ISSN", default)]
    pub issn: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenueRow {
    #[serde(rename = "CId")]
    pub id: u64,
    #[serde(rename = "CN")]
    pub name: String,
    #[serde(rename = "DN", default)]
    pub display_name: Option<String>,
    #[serde(rename = "SN", default)]
    pub short_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FosRow {
    #[serde(rename = "FId")]
    pub id: u64,
    #[serde(rename = "FN")]
    pub name: String,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FosHierarchyRow {
    #[serde(rename = "ChildFId")]
    pub child: u64,
    #[serde(rename = "ParentFId")]
    pub parent: u64,
}

/// Every row of a snapshot, per file. Also the JSON fixture schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRows {
    #[serde(default)]
    pub papers: Vec<PaperRow>,
    #[serde(default)]
    pub paper_authors: Vec<AuthorRow>,
    #[serde(default)]
    pub references: Vec<ReferenceRow>,
    #[serde(default)]
    pub paper_fos: Vec<PaperFosRow>,
    #[serde(default)]
    pub journals: Vec<JournalRow>,
    #[serde(default)]
    pub venues: Vec<VenueRow>,
    #[serde(default)]
    pub fos: Vec<FosRow>,
    #[serde(default)]
    pub fos_hierarchy: Vec<FosHierarchyRow>,
}

/// Load a TSV snapshot directory or, for a `.json` path, a JSON fixture.
pub fn load_path(
    path: &Path,
    strict: bool,
    mode: CitationMode,
) -> Result<(AcademicGraph, LoadReport), IngestError> {
    if path.extension().is_some_and(|e| e == "json") {
        load_json_fixture(path, strict, mode)
    } else {
        load_snapshot(
            &SnapshotManifest::new(path)
                .strict(strict)
                .citation_mode(mode),
        )
    }
}

pub fn load_snapshot(
    manifest: &SnapshotManifest,
) -> Result<(AcademicGraph, LoadReport), IngestError> {
    let papers_path = manifest.dir.join("papers.tsv");
    if !papers_path.is_file() {
        return Err(IngestError::MissingFile(papers_path));
    }
    let mut report = LoadReport::default();
    let mut rows = SnapshotRows::default();
    let strict = manifest.strict;
    let dir = &manifest.dir;

    rows.papers = read_tsv(dir, "papers.tsv", 14, strict, &mut report, parse_paper)?;
    rows.paper_authors = read_tsv(dir, "paper_authors.tsv", 6, strict, &mut report, |c| {
        Ok(AuthorRow {
            paper_id: req_id(c[0])?,
            author_id: req_id(c[1])?,
            author_name: req_text(c[2])?,
            affiliation_id: opt_id(c[3])?,
            affiliation_name: opt_text(c[4]),
            position: c[5]
                .parse()
                .map_err(|_| format!("invalid position {:?}", c[5]))?,
        })
    })?;
    rows.references = read_tsv(dir, "references.tsv", 2, strict, &mut report, |c| {
        Ok(ReferenceRow {
            paper_id: req_id(c[0])?,
            ref_id: req_id(c[1])?,
        })
    })?;
    rows.paper_fos = read_tsv(dir, "paper_fos.tsv", 2, strict, &mut report, |c| {
        Ok(PaperFosRow {
            paper_id: req_id(c[0])?,
            field_id: req_id(c[1])?,
        })
    })?;
    rows.journals = read_tsv(dir, "journals.tsv", 3, strict, &mut report, |c| {
        Ok(JournalRow {
            id: req_id(c[0])?,
            name: req_text(c[1])?,
            issn: opt_text(c[2]),
        })
    })?;
    rows.venues = read_tsv(dir, "venues.tsv", 4, strict, &mut report, |c| {
        Ok(VenueRow {
            id: req_id(c[0])?,
            name: req_text(c[1])?,
            display_name: opt_text(c[2]),
            short_name: opt_text(c[3]),
        })
    })?;
    rows.fos = read_tsv(dir, "fos.tsv", 3, strict, &mut report, |c| {
        Ok(FosRow {
            id: req_id(c[0])?,
            name: req_text(c[1])?,
            level: req_text(c[2])?,
        })
    })?;
    rows.fos_hierarchy = read_tsv(dir, "fos_hierarchy.tsv", 2, strict, &mut report, |c| {
        Ok(FosHierarchyRow {
            child: req_id(c[0])?,
            parent: req_id(c[1])?,
        })
    })?;

    assemble(rows, strict, manifest.citation_mode, report)
}

pub fn load_json_fixture(
    path: &Path,
    strict: bool,
    mode: CitationMode,
) -> Result<(AcademicGraph, LoadReport), IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let rows: SnapshotRows = serde_json::from_str(&text).map_err(|source| IngestError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut report = LoadReport::default();
    for (name, n) in [
        ("papers", rows.papers.len()),
        ("paper_authors", rows.paper_authors.len()),
        ("references", rows.references.len()),
        ("paper_fos", rows.paper_fos.len()),
        ("journals", rows.journals.len()),
        ("venues", rows.venues.len()),
        ("fos", rows.fos.len()),
        ("fos_hierarchy", rows.fos_hierarchy.len()),
    ] {
        report.files.insert(
            format!("{name}.tsv"),
            FileCounts {
                loaded: n,
                dropped: 0,
            },
        );
    }
    assemble(rows, strict, mode, report)
}

type Cols<'a> = [&'a str];

fn read_tsv<T>(
    dir: &Path,
    file: &str,
    width: usize,
    strict: bool,
    report: &mut LoadReport,
    parse: impl Fn(&Cols<'_>) -> Result<T, String>,
) -> Result<Vec<T>, IngestError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).map_err(|source| IngestError::Io {
        path: path.clone(),
        source,
    })?;
    let mut out = Vec::new();
    let mut counts = FileCounts::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let parsed = if cols.len() != width {
            Err(format!("expected {width} columns, found {}", cols.len()))
        } else {
            parse(&cols)
        };
        match parsed {
            Ok(row) => {
                out.push(row);
                counts.loaded += 1;
            }
            Err(reason) if strict => {
                return Err(IngestError::MalformedRow {
                    file: file.to_string(),
                    line: line_no,
                    reason,
                });
            }
            Err(reason) => {
                counts.dropped += 1;
                report
                    .warnings
                    .push(format!("{file}:{line_no}: dropped: {reason}"));
            }
        }
    }
    report.files.insert(file.to_string(), counts);
    Ok(out)
}

fn is_null(s: &str) -> bool {
    s == NULL
}

fn req_id(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("id must be non-zero".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("invalid id {s:?}")),
    }
}

fn opt_id(s: &str) -> Result<Option<u64>, String> {
    if is_null(s) {
        Ok(None)
    } else {
        req_id(s).map(Some)
    }
}

fn req_text(s: &str) -> Result<String, String> {
    if is_null(s) {
        Err("required text is null".into())
    } else {
        Ok(s.to_string())
    }
}

fn opt_text(s: &str) -> Option<String> {
    (!is_null(s)).then(|| s.to_string())
}

fn opt_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<Option<T>, String> {
    if is_null(s) {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| format!("invalid {what} {s:?}"))
}

fn parse_paper(c: &Cols<'_>) -> Result<PaperRow, String> {
    Ok(PaperRow {
        id: req_id(c[0])?,
        title: req_text(c[1])?,
        display_name: opt_text(c[2]),
        year: opt_num(c[3], "year")?,
        date: opt_text(c[4]),
        citation_count: c[5]
            .parse()
            .map_err(|_| format!("invalid citation count {:?}", c[5]))?,
        estimated_citation_count: opt_num(c[6], "estimated citation count")?,
        journal_id: opt_id(c[7])?,
        venue_id: opt_id(c[8])?,
        volume: opt_text(c[9]),
        issue: opt_text(c[10]),
        first_page: opt_text(c[11]),
        last_page: opt_text(c[12]),
        doi: opt_text(c[13]),
        description: None,
        sources: Vec::new(),
    })
}

/// Normalizes text fields and tracks non-basic-Latin output.
struct Normalizer<'r> {
    report: &'r mut LoadReport,
}

impl Normalizer<'_> {
    fn text(&mut self, what: &str, raw: &str) -> NormalizedText {
        let (text, norm) = normalize_with_report(raw);
        if !norm.is_clean() {
            self.report.normalization_warnings += 1;
            self.report.warnings.push(format!(
                "{what}: kept non-basic-Latin characters {:?}",
                norm.non_basic_latin
            ));
        }
        text
    }
}

fn file_error(file: &str, e: GraphError) -> IngestError {
    match e {
        GraphError::DuplicateId(v) => IngestError::DuplicateId {
            file: file.to_string(),
            id: v,
        },
        other => IngestError::MalformedRow {
            file: file.to_string(),
            line: 0,
            reason: other.to_string(),
        },
    }
}

/// Validate row-level constraints that apply to every input format and build
/// the graph.
fn assemble(
    rows: SnapshotRows,
    strict: bool,
    mode: CitationMode,
    mut report: LoadReport,
) -> Result<(AcademicGraph, LoadReport), IngestError> {
    let mut builder = GraphBuilder::new();
    let drop_row = |report: &mut LoadReport, file: &str, line: usize, reason: String| {
        if strict {
            return Err(IngestError::MalformedRow {
                file: file.to_string(),
                line,
                reason,
            });
        }
        let counts = report.files.entry(file.to_string()).or_default();
        counts.loaded = counts.loaded.saturating_sub(1);
        counts.dropped += 1;
        report
            .warnings
            .push(format!("{file}:{line}: dropped: {reason}"));
        Ok(())
    };

    for row in rows.journals {
        let name_norm = Normalizer {
            report: &mut report,
        }
        .text("journals.tsv JN", &row.name);
        builder
            .add_journal(JournalRecord {
                id: id_checked(row.id)?,
                name_norm,
                display_name: Some(row.name),
                issn: row.issn,
            })
            .map_err(|e| file_error("journals.tsv", e))?;
    }
    for row in rows.venues {
        let name_norm = Normalizer {
            report: &mut report,
        }
        .text("venues.tsv CN", &row.name);
        builder
            .add_venue(VenueRecord {
                id: id_checked(row.id)?,
                name_norm,
                display_name: row.display_name,
                short_name: row.short_name,
            })
            .map_err(|e| file_error("venues.tsv", e))?;
    }
    for (i, row) in rows.fos.into_iter().enumerate() {
        let level = match row.level.parse::<FieldLevel>() {
            Ok(l) => l,
            Err(reason) => {
                drop_row(&mut report, "fos.tsv", i + 1, reason)?;
                continue;
            }
        };
        let name_norm = Normalizer {
            report: &mut report,
        }
        .text("fos.tsv FN", &row.name);
        builder
            .add_field(FieldOfStudyRecord {
                id: id_checked(row.id)?,
                name_norm,
                display_name: Some(row.name),
                level,
                parents: Vec::new(),
            })
            .map_err(|e| file_error("fos.tsv", e))?;
    }
    for (i, row) in rows.fos_hierarchy.into_iter().enumerate() {
        let parent = id_checked(row.parent)?;
        match builder.field_mut(id_checked(row.child)?) {
            Some(f) if !f.parents.contains(&parent) => f.parents.push(parent),
            Some(_) => drop_row(
                &mut report,
                "fos_hierarchy.tsv",
                i + 1,
                "duplicate edge".into(),
            )?,
            None => drop_row(
                &mut report,
                "fos_hierarchy.tsv",
                i + 1,
                format!("unknown field {}", row.child),
            )?,
        }
    }

    for (i, row) in rows.papers.into_iter().enumerate() {
        let line = i + 1;
        if let Some(y) = row.year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&y) {
                drop_row(
                    &mut report,
                    "papers.tsv",
                    line,
                    format!("year {y} out of range"),
                )?;
                continue;
            }
        }
        if let Some(d) = &row.date {
            if d.len() != 10 || NaiveDate::parse_from_str(d, "%Y-%m-%d").is_err() {
                drop_row(
                    &mut report,
                    "papers.tsv",
                    line,
                    format!("invalid date {d:?}"),
                )?;
                continue;
            }
        }
        let doi = match row.doi {
            Some(d) if !is_valid_doi(&d) => {
                if strict {
                    return Err(IngestError::MalformedRow {
                        file: "papers.tsv".into(),
                        line,
                        reason: format!("invalid DOI {d:?}"),
                    });
                }
                report
                    .warnings
                    .push(format!("papers.tsv:{line}: ignored invalid DOI {d:?}"));
                None
            }
            other => other,
        };
        let mut norm = Normalizer {
            report: &mut report,
        };
        let title_norm = norm.text("papers.tsv Ti", &row.title);
        let mut words: BTreeSet<NormalizedText> = title_norm
            .tokens()
            .map(crate::normalize::normalize_text)
            .collect();
        if let Some(desc) = &row.description {
            words.extend(
                norm.text("papers description", desc)
                    .tokens()
                    .map(crate::normalize::normalize_text),
            );
        }
        let paper = PaperRecord {
            id: id_checked(row.id)?,
            title_norm,
            display_name: row.display_name,
            year: row.year,
            date: row.date,
            citation_count: row.citation_count,
            estimated_citation_count: row.estimated_citation_count.unwrap_or(row.citation_count),
            references: Vec::new(),
            words,
            authorships: Vec::new(),
            journal_id: row.journal_id.map(id_checked).transpose()?,
            venue_id: row.venue_id.map(id_checked).transpose()?,
            fields_of_study: Vec::new(),
            extended: ExtendedMeta {
                volume: row.volume,
                issue: row.issue,
                first_page: row.first_page,
                last_page: row.last_page,
                doi,
                description: row.description,
                sources: row
                    .sources
                    .into_iter()
                    .map(|s| Source {
                        format: s.format,
                        url: s.url,
                    })
                    .collect(),
            },
        };
        builder
            .add_paper(paper)
            .map_err(|e| file_error("papers.tsv", e))?;
    }

    let mut authorships: BTreeMap<EntityId, Vec<Authorship>> = BTreeMap::new();
    for (i, row) in rows.paper_authors.into_iter().enumerate() {
        let pid = id_checked(row.paper_id)?;
        if !builder.contains_paper(pid) {
            drop_row(
                &mut report,
                "paper_authors.tsv",
                i + 1,
                format!("unknown paper {pid}"),
            )?;
            continue;
        }
        if row.position == 0 {
            drop_row(
                &mut report,
                "paper_authors.tsv",
                i + 1,
                "position must be 1-based".into(),
            )?;
            continue;
        }
        let mut norm = Normalizer {
            report: &mut report,
        };
        let author_name_norm = norm.text("paper_authors.tsv AuN", &row.author_name);
        let affiliation_name_norm = row
            .affiliation_name
            .as_deref()
            .map(|n| norm.text("paper_authors.tsv AfN", n));
        authorships.entry(pid).or_default().push(Authorship {
            author_id: id_checked(row.author_id)?,
            author_name_norm,
            affiliation_id: row.affiliation_id.map(id_checked).transpose()?,
            affiliation_name_norm,
            position: row.position,
        });
    }
    for (pid, mut list) in authorships {
        list.sort_by_key(|a| a.position);
        if let Some(p) = builder.paper_mut(pid) {
            p.authorships = list;
        }
    }

    let mut known_targets = BTreeSet::new();
    for (i, row) in rows.references.into_iter().enumerate() {
        let pid = id_checked(row.paper_id)?;
        let target = id_checked(row.ref_id)?;
        if pid == target {
            drop_row(
                &mut report,
                "references.tsv",
                i + 1,
                format!("paper {pid} references itself"),
            )?;
            continue;
        }
        if !builder.contains_paper(pid) {
            drop_row(
                &mut report,
                "references.tsv",
                i + 1,
                format!("unknown paper {pid}"),
            )?;
            continue;
        }
        let dangling = !builder.contains_paper(target);
        let paper = builder.paper_mut(pid).expect("checked above");
        if paper.references.contains(&target) {
            drop_row(
                &mut report,
                "references.tsv",
                i + 1,
                "duplicate reference".into(),
            )?;
            continue;
        }
        paper.references.push(target);
        if dangling {
            report.dangling_references += 1;
            if known_targets.insert(target) {
                report.warnings.push(format!(
                    "references.tsv:{}: dangling reference to {target}",
                    i + 1
                ));
            }
        }
    }

    for (i, row) in rows.paper_fos.into_iter().enumerate() {
        let pid = id_checked(row.paper_id)?;
        let fid = id_checked(row.field_id)?;
        match builder.paper_mut(pid) {
            Some(p) if !p.fields_of_study.contains(&fid) => p.fields_of_study.push(fid),
            Some(_) => drop_row(
                &mut report,
                "paper_fos.tsv",
                i + 1,
                "duplicate field".into(),
            )?,
            None => drop_row(
                &mut report,
                "paper_fos.tsv",
                i + 1,
                format!("unknown paper {pid}"),
            )?,
        }
    }

    let (graph, changed) = builder.build_with(mode);
    report.papers = graph.paper_count();
    report.journals = graph.journals().count();
    report.venues = graph.venues().count();
    report.fields = graph.fields().count();
    report.hierarchy_flags = graph.hierarchy_flags().len();
    report.citation_counts_changed = changed;
    for flag in graph.hierarchy_flags() {
        report.warnings.push(format!(
            "fos_hierarchy: field {} ({}) has parent {} at level {}",
            flag.child,
            flag.child_level,
            flag.parent,
            flag.parent_level
                .map_or("unknown".to_string(), |l| l.to_string())
        ));
    }
    Ok((graph, report))
}

fn id_checked(v: u64) -> Result<EntityId, IngestError> {
    EntityId::new(v).ok_or_else(|| IngestError::MalformedRow {
        file: "<fixture>".into(),
        line: 0,
        reason: "id must be non-zero".into(),
    })
}

/// Rows that reload to an equal graph.
pub fn snapshot_rows(graph: &AcademicGraph) -> SnapshotRows {
    let mut rows = SnapshotRows::default();
    for j in graph.journals() {
        rows.journals.push(JournalRow {
            id: j.id.get(),
            name: j
                .display_name
                .clone()
                .unwrap_or_else(|| j.name_norm.to_string()),
            issn: j.issn.clone(),
        });
    }
    for c in graph.venues() {
        rows.venues.push(VenueRow {
            id: c.id.get(),
            name: c.name_norm.to_string(),
            display_name: c.display_name.clone(),
            short_name: c.short_name.clone(),
        });
    }
    for f in graph.fields() {
        rows.fos.push(FosRow {
            id: f.id.get(),
            name: f
                .display_name
                .clone()
                .unwrap_or_else(|| f.name_norm.to_string()),
            level: f.level.to_string(),
        });
        for p in &f.parents {
            rows.fos_hierarchy.push(FosHierarchyRow {
                child: f.id.get(),
                parent: p.get(),
            });
        }
    }
    for p in graph.papers() {
        rows.papers.push(PaperRow {
            id: p.id.get(),
            title: p.title_norm.to_string(),
            display_name: p.display_name.clone(),
            year: p.year,
            date: p.date.clone(),
            citation_count: p.citation_count,
            estimated_citation_count: Some(p.estimated_citation_count),
            journal_id: p.journal_id.map(EntityId::get),
            venue_id: p.venue_id.map(EntityId::get),
            volume: p.extended.volume.clone(),
            issue: p.extended.issue.clone(),
            first_page: p.extended.first_page.clone(),
            last_page: p.extended.last_page.clone(),
            doi: p.extended.doi.clone(),
            description: p.extended.description.clone(),
            sources: p
                .extended
                .sources
                .iter()
                .map(|s| SourceRow {
                    format: s.format.clone(),
                    url: s.url.clone(),
                })
                .collect(),
        });
        for a in &p.authorships {
            rows.paper_authors.push(AuthorRow {
                paper_id: p.id.get(),
                author_id: a.author_id.get(),
                author_name: a.author_name_norm.to_string(),
                affiliation_id: a.affiliation_id.map(EntityId::get),
                affiliation_name: a.affiliation_name_norm.as_ref().map(|n| n.to_string()),
                position: a.position,
            });
        }
        for r in &p.references {
            rows.references.push(ReferenceRow {
                paper_id: p.id.get(),
                ref_id: r.get(),
            });
        }
        for f in &p.fields_of_study {
            rows.paper_fos.push(PaperFosRow {
                paper_id: p.id.get(),
                field_id: f.get(),
            });
        }
    }
    rows
}

pub fn export_json(graph: &AcademicGraph, path: &Path) -> Result<(), IngestError> {
    let text = serde_json::to_string_pretty(&snapshot_rows(graph)).map_err(|source| {
        IngestError::Json {
            path: path.to_path_buf(),
            source,
        }
    })?;
    write_file(path, &text)
}

/// Write a TSV snapshot. Descriptions and sources have no TSV column and are
/// not exported; tabs and newlines inside raw text become spaces.
pub fn export_snapshot(graph: &AcademicGraph, dir: &Path) -> Result<(), IngestError> {
    fs::create_dir_all(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let rows = snapshot_rows(graph);
    let s = |v: &str| v.replace(['\t', '\n', '\r'], " ");
    let o = |v: &Option<String>| v.as_deref().map_or(NULL.to_string(), s);
    let n = |v: Option<u64>| v.map_or(NULL.to_string(), |x| x.to_string());

    let mut out = String::new();
    for p in &rows.papers {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.id,
            s(&p.title),
            o(&p.display_name),
            p.year.map_or(NULL.to_string(), |y| y.to_string()),
            o(&p.date),
            p.citation_count,
            n(p.estimated_citation_count),
            n(p.journal_id),
            n(p.venue_id),
            o(&p.volume),
            o(&p.issue),
            o(&p.first_page),
            o(&p.last_page),
            o(&p.doi),
        );
    }
    write_file(&dir.join("papers.tsv"), &out)?;

    out.clear();
    for a in &rows.paper_authors {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            a.paper_id,
            a.author_id,
            s(&a.author_name),
            n(a.affiliation_id),
            o(&a.affiliation_name),
            a.position
        );
    }
    write_file(&dir.join("paper_authors.tsv"), &out)?;

    out.clear();
    for r in &rows.references {
        let _ = writeln!(out, "{}\t{}", r.paper_id, r.ref_id);
    }
    write_file(&dir.join("references.tsv"), &out)?;

    out.clear();
    for r in &rows.paper_fos {
        let _ = writeln!(out, "{}\t{}", r.paper_id, r.field_id);
    }
    write_file(&dir.join("paper_fos.tsv"), &out)?;

    out.clear();
    for j in &rows.journals {
        let _ = writeln!(out, "{}\t{}\t{}", j.id, s(&j.name), o(&j.issn));
    }
    write_file(&dir.join("journals.tsv"), &out)?;

    out.clear();
    for c in &rows.venues {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            c.id,
            s(&c.name),
            o(&c.display_name),
            o(&c.short_name)
        );
    }
    write_file(&dir.join("venues.tsv"), &out)?;

    out.clear();
    for f in &rows.fos {
        let _ = writeln!(out, "{}\t{}\t{}", f.id, s(&f.name), f.level);
    }
    write_file(&dir.join("fos.tsv"), &out)?;

    out.clear();
    for h in &rows.fos_hierarchy {
        let _ = writeln!(out, "{}\t{}", h.child, h.parent);
    }
    write_file(&dir.join("fos_hierarchy.tsv"), &out)
}

fn write_file(path: &Path, text: &str) -> Result<(), IngestError> {
    fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}
