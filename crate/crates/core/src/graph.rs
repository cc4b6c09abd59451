//! In-memory academic graph: papers with embedded authorships, plus journals,
//! venues and fields of study, indexed by journal-year and author name.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::num::NonZeroU64;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::normalize::NormalizedText;

pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 3000;

/// Identifier of a graph entity. Zero is never a valid id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(NonZeroU64);

impl EntityId {
    pub fn new(value: u64) -> Option<Self> {
        NonZeroU64::new(value).map(Self)
    }

    pub fn get(self) -> u64 {
        self.0.get()
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for EntityId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: u64 = s.trim().parse().map_err(|_| format!("invalid id {s:?}"))?;
        EntityId::new(v).ok_or_else(|| "id must be non-zero".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Authorship {
    pub author_id: EntityId,
    pub author_name_norm: NormalizedText,
    pub affiliation_id: Option<EntityId>,
    pub affiliation_name_norm: Option<NormalizedText>,
    /// 1-based byline position.
    pub position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub format: String,
    pub url: String,
}

/// Response-only metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedMeta {
    pub volume: Option<String>,
    pub issue: Option<String>,
    pub first_page: Option<String>,
    pub last_page: Option<String>,
    pub doi: Option<String>,
    pub description: Option<String>,
    pub sources: Vec<Source>,
}

/// `10.<registrant>/<suffix>` with a numeric, dot-separated registrant.
pub fn is_valid_doi(doi: &str) -> bool {
    let Some(rest) = doi.strip_prefix("10.") else {
        return false;
    };
    let Some((registrant, suffix)) = rest.split_once('/') else {
        return false;
    };
    !registrant.is_empty()
        && registrant
            .split('.')
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
        && !suffix.is_empty()
        && !suffix.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: EntityId,
    pub title_norm: NormalizedText,
    pub display_name: Option<String>,
    pub year: Option<i32>,
    /// ISO-8601 `YYYY-MM-DD`.
    pub date: Option<String>,
    pub citation_count: u64,
    pub estimated_citation_count: u64,
    pub references: Vec<EntityId>,
    pub words: BTreeSet<NormalizedText>,
    pub authorships: Vec<Authorship>,
    pub journal_id: Option<EntityId>,
    pub venue_id: Option<EntityId>,
    pub fields_of_study: Vec<EntityId>,
    pub extended: ExtendedMeta,
}

impl PaperRecord {
    pub fn has_author(&self, name: &NormalizedText) -> bool {
        self.authorships.iter().any(|a| &a.author_name_norm == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub id: EntityId,
    pub name_norm: NormalizedText,
    pub display_name: Option<String>,
    pub issn: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueRecord {
    pub id: EntityId,
    pub name_norm: NormalizedText,
    pub display_name: Option<String>,
    pub short_name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FieldLevel {
    L0,
    L1,
    L2,
    L3,
}

impl FieldLevel {
    pub fn depth(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for FieldLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.depth())
    }
}

impl FromStr for FieldLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "L0" => Ok(FieldLevel::L0),
            "L1" => Ok(FieldLevel::L1),
            "L2" => Ok(FieldLevel::L2),
            "L3" => Ok(FieldLevel::L3),
            other => Err(format!("invalid field level {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldOfStudyRecord {
    pub id: EntityId,
    pub name_norm: NormalizedText,
    pub display_name: Option<String>,
    pub level: FieldLevel,
    pub parents: Vec<EntityId>,
}

/// A hierarchy edge whose parent is not exactly one level above the child.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchyFlag {
    pub child: EntityId,
    pub parent: EntityId,
    pub child_level: FieldLevel,
    pub parent_level: Option<FieldLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CitationMode {
    /// Keep database-reported counts.
    Stored,
    /// Count in-snapshot citing papers.
    Derived,
}

/// Immutable academic graph. Built through [`GraphBuilder`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AcademicGraph {
    papers: BTreeMap<EntityId, PaperRecord>,
    journals: BTreeMap<EntityId, JournalRecord>,
    venues: BTreeMap<EntityId, VenueRecord>,
    fields: BTreeMap<EntityId, FieldOfStudyRecord>,
    index_journal_year: BTreeMap<(EntityId, i32), BTreeSet<EntityId>>,
    index_author_name: BTreeMap<NormalizedText, BTreeSet<EntityId>>,
    /// Papers by descending ECC then ascending id.
    ranked: Vec<EntityId>,
    rank_of: HashMap<EntityId, usize>,
    hierarchy_flags: Vec<HierarchyFlag>,
}

impl AcademicGraph {
    pub fn get_paper(&self, id: EntityId) -> Result<&PaperRecord, GraphError> {
        self.papers.get(&id).ok_or(GraphError::NotFound(id.get()))
    }

    /// Lookup by raw id; zero is reported as not found.
    pub fn get_paper_raw(&self, id: u64) -> Result<&PaperRecord, GraphError> {
        EntityId::new(id)
            .and_then(|id| self.papers.get(&id))
            .ok_or(GraphError::NotFound(id))
    }

    pub fn papers_in_journal_year(&self, journal_id: EntityId, year: i32) -> BTreeSet<EntityId> {
        self.index_journal_year
            .get(&(journal_id, year))
            .cloned()
            .unwrap_or_default()
    }

    pub fn papers_by_author(&self, name: &NormalizedText) -> BTreeSet<EntityId> {
        self.index_author_name
            .get(name)
            .cloned()
            .unwrap_or_default()
    }

    pub fn papers(&self) -> impl Iterator<Item = &PaperRecord> {
        self.papers.values()
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn journal(&self, id: EntityId) -> Option<&JournalRecord> {
        self.journals.get(&id)
    }

    pub fn journals(&self) -> impl Iterator<Item = &JournalRecord> {
        self.journals.values()
    }

    pub fn journal_by_issn(&self, issn: &str) -> Option<&JournalRecord> {
        let wanted = issn.trim();
        self.journals.values().find(|j| {
            j.issn
                .as_deref()
                .is_some_and(|i| i.eq_ignore_ascii_case(wanted))
        })
    }

    pub fn venue(&self, id: EntityId) -> Option<&VenueRecord> {
        self.venues.get(&id)
    }

    pub fn venues(&self) -> impl Iterator<Item = &VenueRecord> {
        self.venues.values()
    }

    pub fn field(&self, id: EntityId) -> Option<&FieldOfStudyRecord> {
        self.fields.get(&id)
    }

    pub fn fields(&self) -> impl Iterator<Item = &FieldOfStudyRecord> {
        self.fields.values()
    }

    pub fn hierarchy_flags(&self) -> &[HierarchyFlag] {
        &self.hierarchy_flags
    }

    /// Papers in canonical relevance order (descending ECC, ascending id).
    pub fn ranked_papers(&self) -> impl Iterator<Item = &PaperRecord> {
        self.ranked.iter().map(|id| &self.papers[id])
    }

    /// 0-based static rank of a paper.
    pub fn rank_of(&self, id: EntityId) -> Option<usize> {
        self.rank_of.get(&id).copied()
    }

    /// Returns the number of papers whose citation count changed.
    pub fn recompute_citation_counts(&mut self, mode: CitationMode) -> usize {
        if mode == CitationMode::Stored {
            return 0;
        }
        let mut incoming: HashMap<EntityId, u64> = HashMap::new();
        for paper in self.papers.values() {
            for target in &paper.references {
                if self.papers.contains_key(target) {
                    *incoming.entry(*target).or_default() += 1;
                }
            }
        }
        let mut changed = 0;
        for paper in self.papers.values_mut() {
            let derived = incoming.get(&paper.id).copied().unwrap_or(0);
            if paper.citation_count != derived {
                paper.citation_count = derived;
                changed += 1;
            }
        }
        changed
    }

    fn rebuild_indexes(&mut self) {
        self.index_journal_year.clear();
        self.index_author_name.clear();
        for paper in self.papers.values() {
            if let (Some(j), Some(y)) = (paper.journal_id, paper.year) {
                self.index_journal_year
                    .entry((j, y))
                    .or_default()
                    .insert(paper.id);
            }
            for a in &paper.authorships {
                self.index_author_name
                    .entry(a.author_name_norm.clone())
                    .or_default()
                    .insert(paper.id);
            }
        }

        let mut ranked: Vec<(u64, EntityId)> = self
            .papers
            .values()
            .map(|p| (p.estimated_citation_count, p.id))
            .collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        self.ranked = ranked.into_iter().map(|(_, id)| id).collect();
        self.rank_of = self
            .ranked
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i))
            .collect();

        self.hierarchy_flags.clear();
        for field in self.fields.values() {
            for parent in &field.parents {
                let parent_level = self.fields.get(parent).map(|p| p.level);
                let coherent = parent_level.is_some_and(|pl| pl.depth() + 1 == field.level.depth());
                if !coherent {
                    self.hierarchy_flags.push(HierarchyFlag {
                        child: field.id,
                        parent: *parent,
                        child_level: field.level,
                        parent_level,
                    });
                }
            }
        }
    }
}

/// Collects records and produces an indexed [`AcademicGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    graph: AcademicGraph,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains_paper(&self, id: EntityId) -> bool {
        self.graph.papers.contains_key(&id)
    }

    pub fn paper_mut(&mut self, id: EntityId) -> Option<&mut PaperRecord> {
        self.graph.papers.get_mut(&id)
    }

    pub fn add_paper(&mut self, paper: PaperRecord) -> Result<(), GraphError> {
        if let Some(y) = paper.year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&y) {
                return Err(GraphError::InvalidRecord(format!(
                    "paper {}: year {y} outside [{MIN_YEAR}, {MAX_YEAR}]",
                    paper.id
                )));
            }
        }
        if paper.references.contains(&paper.id) {
            return Err(GraphError::InvalidRecord(format!(
                "paper {} references itself",
                paper.id
            )));
        }
        let mut seen = BTreeSet::new();
        if !paper.references.iter().all(|r| seen.insert(*r)) {
            return Err(GraphError::InvalidRecord(format!(
                "paper {} has duplicate references",
                paper.id
            )));
        }
        if self.graph.papers.contains_key(&paper.id) {
            return Err(GraphError::DuplicateId(paper.id.get()));
        }
        self.graph.papers.insert(paper.id, paper);
        Ok(())
    }

    pub fn add_journal(&mut self, journal: JournalRecord) -> Result<(), GraphError> {
        if self.graph.journals.contains_key(&journal.id) {
            return Err(GraphError::DuplicateId(journal.id.get()));
        }
        self.graph.journals.insert(journal.id, journal);
        Ok(())
    }

    pub fn add_venue(&mut self, venue: VenueRecord) -> Result<(), GraphError> {
        if self.graph.venues.contains_key(&venue.id) {
            return Err(GraphError::DuplicateId(venue.id.get()));
        }
        self.graph.venues.insert(venue.id, venue);
        Ok(())
    }

    pub fn add_field(&mut self, field: FieldOfStudyRecord) -> Result<(), GraphError> {
        if self.graph.fields.contains_key(&field.id) {
            return Err(GraphError::DuplicateId(field.id.get()));
        }
        self.graph.fields.insert(field.id, field);
        Ok(())
    }

    pub fn field_mut(&mut self, id: EntityId) -> Option<&mut FieldOfStudyRecord> {
        self.graph.fields.get_mut(&id)
    }

    pub fn build(mut self) -> AcademicGraph {
        self.graph.rebuild_indexes();
        self.graph
    }

    /// Build after recomputing citation counts in the given mode.
    pub fn build_with(mut self, mode: CitationMode) -> (AcademicGraph, usize) {
        let changed = self.graph.recompute_citation_counts(mode);
        (self.build(), changed)
    }
}

impl From<AcademicGraph> for GraphBuilder {
    fn from(graph: AcademicGraph) -> Self {
        Self { graph }
    }
}
