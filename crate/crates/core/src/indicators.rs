//! Journal-normalized citation score and percentile-rank classes against a
//! journal × year-range reference set.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::IndicatorError;
use crate::graph::{AcademicGraph, EntityId};
use crate::histogram::{calc_histogram, RequestCap};
use crate::query::{AttrValue, Attribute, Query, QueryExpr};

/// Multiset of citation counts, kept sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationDistribution {
    sorted: Vec<u64>,
    sum: u128,
}

impl CitationDistribution {
    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Self {
        let mut sorted: Vec<u64> = counts.into_iter().collect();
        sorted.sort_unstable();
        let sum = sorted.iter().map(|&c| u128::from(c)).sum();
        Self { sorted, sum }
    }

    /// From `(citation count, number of papers)` pairs.
    pub fn from_histogram(entries: impl IntoIterator<Item = (u64, u64)>) -> Self {
        Self::from_counts(
            entries
                .into_iter()
                .flat_map(|(value, n)| std::iter::repeat_n(value, n as usize)),
        )
    }

    pub fn size(&self) -> usize {
        self.sorted.len()
    }

    pub fn sum(&self) -> u128 {
        self.sum
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn as_sorted(&self) -> &[u64] {
        &self.sorted
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.sum as f64 / self.sorted.len() as f64)
    }

    pub fn merge(&self, other: &CitationDistribution) -> CitationDistribution {
        Self::from_counts(self.sorted.iter().chain(other.sorted.iter()).copied())
    }
}

/// Citation distributions of one journal, one cell per publication year.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub journal_id: EntityId,
    pub first_year: i32,
    pub last_year: i32,
    pub cells: BTreeMap<i32, CitationDistribution>,
    pub pooled: CitationDistribution,
}

impl ReferenceSet {
    /// Assemble from per-year cells; every year in range gets a (possibly
    /// empty) cell.
    pub fn from_cells(
        journal_id: EntityId,
        first_year: i32,
        last_year: i32,
        mut cells: BTreeMap<i32, CitationDistribution>,
    ) -> Result<Self, IndicatorError> {
        if first_year > last_year {
            return Err(IndicatorError::InvalidYears {
                first: first_year,
                last: last_year,
            });
        }
        cells.retain(|y, _| (first_year..=last_year).contains(y));
        for y in first_year..=last_year {
            cells.entry(y).or_default();
        }
        let pooled = CitationDistribution::from_counts(
            cells.values().flat_map(|c| c.as_sorted().iter().copied()),
        );
        if pooled.is_empty() {
            return Err(IndicatorError::EmptyReferenceSet {
                journal: journal_id.get(),
                first: first_year,
                last: last_year,
            });
        }
        Ok(Self {
            journal_id,
            first_year,
            last_year,
            cells,
            pooled,
        })
    }

    pub fn contains_year(&self, year: i32) -> bool {
        (self.first_year..=self.last_year).contains(&year)
    }

    pub fn cell(&self, year: i32) -> Option<&CitationDistribution> {
        self.cells.get(&year)
    }

    /// Mean citations of the journal's papers published in `year`.
    pub fn journal_year_mean(&self, year: i32) -> Result<f64, IndicatorError> {
        self.cell(year)
            .and_then(CitationDistribution::mean)
            .ok_or(IndicatorError::EmptyCell(year))
    }
}

/// Build the reference set from per-year CalcHistogram requests over
/// `And(J.JId=<journal>, Y=<year>)`.
pub fn build_reference_set(
    graph: &AcademicGraph,
    journal_id: EntityId,
    first_year: i32,
    last_year: i32,
    cap: RequestCap,
) -> Result<ReferenceSet, IndicatorError> {
    if graph.journal(journal_id).is_none() {
        return Err(IndicatorError::UnknownJournal(journal_id.to_string()));
    }
    if first_year > last_year {
        return Err(IndicatorError::InvalidYears {
            first: first_year,
            last: last_year,
        });
    }
    let mut cells = BTreeMap::new();
    for year in first_year..=last_year {
        let query = Query::from(QueryExpr::journal_years(journal_id.get(), year, year));
        let resp = calc_histogram(graph, &query, &[Attribute::CitationCount], cap)?;
        let entries = resp.histograms[0]
            .entries
            .iter()
            .filter_map(|(v, n)| match v {
                AttrValue::UInt(cc) => Some((*cc, *n)),
                _ => None,
            });
        cells.insert(year, CitationDistribution::from_histogram(entries));
    }
    ReferenceSet::from_cells(journal_id, first_year, last_year, cells)
}

/// Percentile of a citation count within a sorted reference distribution.
pub trait PercentileFormula {
    fn percentile(&self, sorted: &[u64], citations: u64) -> f64;
}

/// `100 · |{x < c}| / N`, with zero citations pinned to percentile 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct StrictlyFewer;

impl PercentileFormula for StrictlyFewer {
    fn percentile(&self, sorted: &[u64], citations: u64) -> f64 {
        if citations == 0 || sorted.is_empty() {
            return 0.0;
        }
        let fewer = sorted.partition_point(|&x| x < citations);
        100.0 * fewer as f64 / sorted.len() as f64
    }
}

/// Citation count → percentile over one distribution.
#[derive(Debug, Clone)]
pub struct PercentileMap<F = StrictlyFewer> {
    sorted: Vec<u64>,
    formula: F,
}

impl<F: PercentileFormula> PercentileMap<F> {
    pub fn with_formula(dist: &CitationDistribution, formula: F) -> Result<Self, IndicatorError> {
        if dist.is_empty() {
            return Err(IndicatorError::EmptyDistribution);
        }
        Ok(Self {
            sorted: dist.as_sorted().to_vec(),
            formula,
        })
    }

    pub fn percentile(&self, citations: u64) -> f64 {
        self.formula.percentile(&self.sorted, citations)
    }
}

pub fn compute_percentiles(dist: &CitationDistribution) -> Result<PercentileMap, IndicatorError> {
    PercentileMap::with_formula(dist, StrictlyFewer)
}

/// Lower percentile boundaries of PR classes 2, 3 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrScheme {
    boundaries: [f64; 3],
}

impl PrScheme {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self, IndicatorError> {
        if !(0.0 < b1 && b1 < b2 && b2 < b3 && b3 < 100.0) {
            return Err(IndicatorError::InvalidScheme(format!(
                "boundaries must satisfy 0 < {b1} < {b2} < {b3} < 100"
            )));
        }
        Ok(Self {
            boundaries: [b1, b2, b3],
        })
    }

    pub fn boundaries(&self) -> [f64; 3] {
        self.boundaries
    }

    /// Half-open percentile interval of a class, e.g. `[80th; 90th[`.
    pub fn interval_label(&self, class: PrClass) -> String {
        let [b1, b2, b3] = self.boundaries;
        let fmt = |v: f64| format!("{}th", trim_float(v));
        match class {
            PrClass::Four => format!("[{}; 100th]", fmt(b3)),
            PrClass::Three => format!("[{}; {}[", fmt(b2), fmt(b3)),
            PrClass::Two => format!("[{}; {}[", fmt(b1), fmt(b2)),
            PrClass::One => format!("[0th; {}[", fmt(b1)),
        }
    }
}

fn trim_float(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

impl Default for PrScheme {
    fn default() -> Self {
        Self {
            boundaries: [50.0, 80.0, 90.0],
        }
    }
}

impl FromStr for PrScheme {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| IndicatorError::InvalidScheme(format!("cannot parse {s:?}")))?;
        match parts.as_slice() {
            [a, b, c] => PrScheme::new(*a, *b, *c),
            _ => Err(IndicatorError::InvalidScheme(format!(
                "expected three boundaries, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for PrScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.boundaries;
        write!(f, "{},{},{}", trim_float(a), trim_float(b), trim_float(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PrClass {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl PrClass {
    /// Highest impact first, as reports list them.
    pub const DESCENDING: [PrClass; 4] =
        [PrClass::Four, PrClass::Three, PrClass::Two, PrClass::One];

    pub fn number(self) -> u8 {
        self as u8
    }

    fn index(self) -> usize {
        self as usize - 1
    }
}

pub fn assign_pr_class(percentile: f64, scheme: &PrScheme) -> PrClass {
    let [b1, b2, b3] = scheme.boundaries;
    if percentile >= b3 {
        PrClass::Four
    } else if percentile >= b2 {
        PrClass::Three
    } else if percentile >= b1 {
        PrClass::Two
    } else {
        PrClass::One
    }
}

/// Which distribution percentiles are computed against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentilePool {
    /// All years of the reference set together.
    #[default]
    Pooled,
    /// The publication's own year cell.
    PerYear,
}

impl FromStr for PercentilePool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pooled" => Ok(PercentilePool::Pooled),
            "per-year" => Ok(PercentilePool::PerYear),
            other => Err(format!("unknown percentile pool {other:?}")),
        }
    }
}

/// One publication to be scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Publication {
    pub paper_id: Option<EntityId>,
    pub year: Option<i32>,
    pub citations: u64,
}

impl Publication {
    pub fn new(citations: u64, year: i32) -> Self {
        Self {
            paper_id: None,
            year: Some(year),
            citations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    MissingYear,
    OutOfRange,
    EmptyCell,
    /// Only the JNCS skips these; they still get a percentile.
    ZeroMeanCell,
}

impl ExclusionReason {
    pub fn affects_pr(self) -> bool {
        !matches!(self, ExclusionReason::ZeroMeanCell)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub paper_id: Option<EntityId>,
    pub year: Option<i32>,
    pub reason: ExclusionReason,
}

fn exclusion_for(pub_: &Publication, refset: &ReferenceSet) -> Option<ExclusionReason> {
    let Some(year) = pub_.year else {
        return Some(ExclusionReason::MissingYear);
    };
    if !refset.contains_year(year) {
        return Some(ExclusionReason::OutOfRange);
    }
    match refset.cell(year).and_then(CitationDistribution::mean) {
        None => Some(ExclusionReason::EmptyCell),
        Some(0.0) => Some(ExclusionReason::ZeroMeanCell),
        Some(_) => None,
    }
}

/// Mean of `citations / journal_year_mean(year)` over the publications that
/// can be normalized; the rest are returned as exclusions.
pub fn jncs(
    pubs: &[Publication],
    refset: &ReferenceSet,
) -> Result<(f64, Vec<Exclusion>), IndicatorError> {
    if pubs.is_empty() {
        return Err(IndicatorError::NoPublications);
    }
    let mut excluded = Vec::new();
    let mut total = 0.0;
    let mut scored = 0usize;
    for p in pubs {
        if let Some(reason) = exclusion_for(p, refset) {
            excluded.push(Exclusion {
                paper_id: p.paper_id,
                year: p.year,
                reason,
            });
            continue;
        }
        let year = p.year.expect("checked by exclusion_for");
        total += p.citations as f64 / refset.journal_year_mean(year)?;
        scored += 1;
    }
    if scored == 0 {
        return Err(IndicatorError::AllExcluded);
    }
    Ok((total / scored as f64, excluded))
}

/// Percentage of publications per PR class, indexed by class.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrShares([f64; 4]);

impl PrShares {
    pub fn share(&self, class: PrClass) -> f64 {
        self.0[class.index()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    fn from_counts(counts: [usize; 4]) -> Self {
        let n: usize = counts.iter().sum();
        Self(counts.map(|c| 100.0 * c as f64 / n as f64))
    }
}

impl Serialize for PrShares {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        for class in PrClass::DESCENDING {
            map.serialize_entry(&class.number().to_string(), &self.share(class))?;
        }
        map.end()
    }
}

fn percentile_for(p: &Publication, refset: &ReferenceSet, pool: PercentilePool) -> Option<f64> {
    let dist = match pool {
        PercentilePool::Pooled => &refset.pooled,
        PercentilePool::PerYear => refset.cell(p.year?)?,
    };
    compute_percentiles(dist)
        .ok()
        .map(|m| m.percentile(p.citations))
}

pub fn pr_distribution(
    pubs: &[Publication],
    refset: &ReferenceSet,
    scheme: &PrScheme,
    pool: PercentilePool,
) -> Result<PrShares, IndicatorError> {
    let mut counts = [0usize; 4];
    for p in pubs {
        if exclusion_for(p, refset).is_some_and(ExclusionReason::affects_pr) {
            continue;
        }
        if let Some(pct) = percentile_for(p, refset, pool) {
            counts[assign_pr_class(pct, scheme).index()] += 1;
        }
    }
    if counts.iter().sum::<usize>() == 0 {
        return Err(IndicatorError::AllExcluded);
    }
    Ok(PrShares::from_counts(counts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublicationScore {
    pub paper_id: Option<EntityId>,
    pub year: Option<i32>,
    pub citations: u64,
    pub journal_year_mean: Option<f64>,
    pub normalized_score: Option<f64>,
    pub percentile: Option<f64>,
    pub pr_class: Option<PrClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorReport {
    pub author: String,
    pub publications: Vec<PublicationScore>,
    pub jncs: f64,
    pub pr_shares: PrShares,
    pub excluded: Vec<Exclusion>,
}

impl AuthorReport {
    pub fn scored_count(&self) -> usize {
        self.publications
            .iter()
            .filter(|p| p.pr_class.is_some())
            .count()
    }
}

pub fn author_report(
    author: &str,
    pubs: &[Publication],
    refset: &ReferenceSet,
    scheme: &PrScheme,
    pool: PercentilePool,
) -> Result<AuthorReport, IndicatorError> {
    let (jncs_value, excluded) = jncs(pubs, refset)?;
    let pr_shares = pr_distribution(pubs, refset, scheme, pool)?;
    let publications = pubs
        .iter()
        .map(|p| {
            let reason = exclusion_for(p, refset);
            let mean = p.year.and_then(|y| refset.journal_year_mean(y).ok());
            let normalized_score = match (reason, mean) {
                (None, Some(m)) => Some(p.citations as f64 / m),
                _ => None,
            };
            let percentile = if reason.is_some_and(ExclusionReason::affects_pr) {
                None
            } else {
                percentile_for(p, refset, pool)
            };
            PublicationScore {
                paper_id: p.paper_id,
                year: p.year,
                citations: p.citations,
                journal_year_mean: mean,
                normalized_score,
                percentile,
                pr_class: percentile.map(|pct| assign_pr_class(pct, scheme)),
            }
        })
        .collect();
    Ok(AuthorReport {
        author: author.to_string(),
        publications,
        jncs: jncs_value,
        pr_shares,
        excluded,
    })
}

/// Dense ranking by descending JNCS; exact ties share a rank.
pub fn rank_by_jncs(reports: &[AuthorReport]) -> Vec<(String, usize)> {
    let mut values: Vec<f64> = reports.iter().map(|r| r.jncs).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.dedup();
    reports
        .iter()
        .map(|r| {
            let rank = values.iter().position(|v| *v == r.jncs).unwrap_or(0) + 1;
            (r.author.clone(), rank)
        })
        .collect()
}
