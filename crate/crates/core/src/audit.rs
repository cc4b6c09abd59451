//! Cross-database metadata checks: title matching, publication-year
//! discrepancies and author coverage.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::AuditError;
use crate::graph::{AcademicGraph, EntityId, PaperRecord};
use crate::normalize::NormalizedText;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKey {
    #[default]
    Title,
    /// Case-insensitive DOI equality; needs DOIs in both snapshots.
    Doi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub key: String,
    pub id_a: EntityId,
    pub id_b: EntityId,
    pub year_a: Option<i32>,
    pub year_b: Option<i32>,
    pub authors_a: BTreeSet<NormalizedText>,
    pub authors_b: BTreeSet<NormalizedText>,
}

impl MatchedPair {
    /// Swap sides.
    pub fn flipped(&self) -> MatchedPair {
        MatchedPair {
            key: self.key.clone(),
            id_a: self.id_b,
            id_b: self.id_a,
            year_a: self.year_b,
            year_b: self.year_a,
            authors_a: self.authors_b.clone(),
            authors_b: self.authors_a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnmatchedReason {
    NotFound,
    Ambiguous,
    /// Candidate id absent from the source graph.
    UnknownCandidate,
    /// No usable match key (e.g. no DOI) on the candidate.
    NoKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unmatched {
    pub id: EntityId,
    pub reason: UnmatchedReason,
}

fn key_of(paper: &PaperRecord, key: MatchKey) -> Option<String> {
    match key {
        MatchKey::Title => (!paper.title_norm.is_empty()).then(|| paper.title_norm.to_string()),
        MatchKey::Doi => paper.extended.doi.as_ref().map(|d| d.to_ascii_uppercase()),
    }
}

fn author_set(paper: &PaperRecord) -> BTreeSet<NormalizedText> {
    paper
        .authorships
        .iter()
        .map(|a| a.author_name_norm.clone())
        .collect()
}

/// Pair each candidate of `graph_a` with the record in `graph_b` sharing its
/// match key. Among several records with the key, the one with the smallest
/// year distance wins; a tie at that distance is ambiguous.
pub fn match_publications(
    graph_a: &AcademicGraph,
    graph_b: &AcademicGraph,
    candidates: &[EntityId],
    key: MatchKey,
) -> (Vec<MatchedPair>, Vec<Unmatched>) {
    let mut index: HashMap<String, Vec<&PaperRecord>> = HashMap::new();
    for p in graph_b.papers() {
        if let Some(k) = key_of(p, key) {
            index.entry(k).or_default().push(p);
        }
    }

    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for &id in candidates {
        let Ok(a) = graph_a.get_paper(id) else {
            unmatched.push(Unmatched {
                id,
                reason: UnmatchedReason::UnknownCandidate,
            });
            continue;
        };
        let Some(k) = key_of(a, key) else {
            unmatched.push(Unmatched {
                id,
                reason: UnmatchedReason::NoKey,
            });
            continue;
        };
        let Some(found) = index.get(&k) else {
            unmatched.push(Unmatched {
                id,
                reason: UnmatchedReason::NotFound,
            });
            continue;
        };
        let distance = |b: &PaperRecord| match (a.year, b.year) {
            (Some(x), Some(y)) => i64::from(x.abs_diff(y)),
            _ => i64::MAX,
        };
        let best = found.iter().map(|b| distance(b)).min().unwrap_or(i64::MAX);
        let mut at_best = found.iter().filter(|b| distance(b) == best);
        match (at_best.next(), at_best.next()) {
            (Some(b), None) => pairs.push(MatchedPair {
                key: k,
                id_a: a.id,
                id_b: b.id,
                year_a: a.year,
                year_b: b.year,
                authors_a: author_set(a),
                authors_b: author_set(b),
            }),
            _ => unmatched.push(Unmatched {
                id,
                reason: UnmatchedReason::Ambiguous,
            }),
        }
    }
    (pairs, unmatched)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YearMismatch {
    pub id_a: EntityId,
    pub id_b: EntityId,
    pub year_a: i32,
    pub year_b: i32,
    /// `year_b - year_a`, never zero.
    pub delta: i32,
}

/// Pairs whose years differ, with the mismatch rate in percent of all pairs.
/// Pairs missing a year on either side cannot be compared and never count as
/// mismatches.
pub fn year_discrepancies(pairs: &[MatchedPair]) -> Result<(Vec<YearMismatch>, f64), AuditError> {
    if pairs.is_empty() {
        return Err(AuditError::EmptyPairs);
    }
    let mismatches: Vec<YearMismatch> = pairs
        .iter()
        .filter_map(|p| match (p.year_a, p.year_b) {
            (Some(a), Some(b)) if a != b => Some(YearMismatch {
                id_a: p.id_a,
                id_b: p.id_b,
                year_a: a,
                year_b: b,
                delta: b - a,
            }),
            _ => None,
        })
        .collect();
    let rate = 100.0 * mismatches.len() as f64 / pairs.len() as f64;
    Ok((mismatches, rate))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorCoverage {
    pub author: NormalizedText,
    pub pairs: usize,
    /// Percent of pairs whose graph-A record lists the author.
    pub percent_a: f64,
    pub percent_b: f64,
    pub missing_a: Vec<EntityId>,
    pub missing_b: Vec<EntityId>,
}

impl AuthorCoverage {
    pub fn missing_percent_a(&self) -> f64 {
        100.0 - self.percent_a
    }

    pub fn missing_percent_b(&self) -> f64 {
        100.0 - self.percent_b
    }
}

pub fn author_coverage(
    pairs: &[MatchedPair],
    author: &NormalizedText,
) -> Result<AuthorCoverage, AuditError> {
    if pairs.is_empty() {
        return Err(AuditError::EmptyPairs);
    }
    let missing_a: Vec<EntityId> = pairs
        .iter()
        .filter(|p| !p.authors_a.contains(author))
        .map(|p| p.id_a)
        .collect();
    let missing_b: Vec<EntityId> = pairs
        .iter()
        .filter(|p| !p.authors_b.contains(author))
        .map(|p| p.id_b)
        .collect();
    let n = pairs.len() as f64;
    Ok(AuthorCoverage {
        author: author.clone(),
        pairs: pairs.len(),
        percent_a: 100.0 * (pairs.len() - missing_a.len()) as f64 / n,
        percent_b: 100.0 * (pairs.len() - missing_b.len()) as f64 / n,
        missing_a,
        missing_b,
    })
}

/// Pairs where either side lists the author: the author's publications.
pub fn pairs_for_author(pairs: &[MatchedPair], author: &NormalizedText) -> Vec<MatchedPair> {
    pairs
        .iter()
        .filter(|p| p.authors_a.contains(author) || p.authors_b.contains(author))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub candidates: usize,
    pub matched: usize,
    pub unmatched_a: Vec<Unmatched>,
    /// Graph-B records not paired with any candidate. Only meaningful when the
    /// candidate set covers the whole of graph A.
    pub unmatched_b: Vec<EntityId>,
    pub year_mismatches: Vec<YearMismatch>,
    pub year_mismatch_rate: f64,
    pub author_coverage: Vec<AuthorCoverage>,
}

pub fn audit(
    graph_a: &AcademicGraph,
    graph_b: &AcademicGraph,
    candidates: &[EntityId],
    authors: &[NormalizedText],
    key: MatchKey,
) -> Result<AuditReport, AuditError> {
    let (pairs, unmatched_a) = match_publications(graph_a, graph_b, candidates, key);
    let (year_mismatches, year_mismatch_rate) = year_discrepancies(&pairs)?;
    let paired_b: BTreeSet<EntityId> = pairs.iter().map(|p| p.id_b).collect();
    let unmatched_b = graph_b
        .papers()
        .map(|p| p.id)
        .filter(|id| !paired_b.contains(id))
        .collect();
    let author_coverage = authors
        .iter()
        .map(|name| {
            let own = pairs_for_author(&pairs, name);
            author_coverage(&own, name)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AuditReport {
        candidates: candidates.len(),
        matched: pairs.len(),
        unmatched_a,
        unmatched_b,
        year_mismatches,
        year_mismatch_rate,
        author_coverage,
    })
}

/// One decimal, half away from zero: 19.2982… → "19.3".
pub fn display_percent(value: f64) -> String {
    format!("{:.1}", (value * 10.0).round() / 10.0)
}
