use serde_json::{Map, Value};

use super::{AttrKind, Attribute, CmpOp, Literal, Prefix, Query, QueryExpr};
use crate::error::QueryError;
use crate::graph::{AcademicGraph, Authorship, EntityId, PaperRecord};
use crate::normalize::{normalize_text, NormalizedText};

/// A single attribute value of a paper, as histogrammed and compared.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttrValue {
    Int(i64),
    UInt(u64),
    Text(String),
}

impl AttrValue {
    pub fn to_json(&self) -> Value {
        match self {
            AttrValue::Int(v) => Value::from(*v),
            AttrValue::UInt(v) => Value::from(*v),
            AttrValue::Text(s) => Value::from(s.as_str()),
        }
    }
}

/// Every value of `attr` on `paper`, one per occurrence.
pub fn attribute_values(
    graph: &AcademicGraph,
    paper: &PaperRecord,
    attr: Attribute,
) -> Vec<AttrValue> {
    use Attribute::*;
    let text = |t: &NormalizedText| AttrValue::Text(t.as_str().to_string());
    let id = |i: EntityId| AttrValue::UInt(i.get());
    let opt_text = |t: Option<&String>| t.map(|s| AttrValue::Text(s.clone())).into_iter().collect();
    match attr {
        Title => vec![text(&paper.title_norm)],
        Id => vec![id(paper.id)],
        Year => paper
            .year
            .map(|y| AttrValue::Int(y.into()))
            .into_iter()
            .collect(),
        Date => opt_text(paper.date.as_ref()),
        CitationCount => vec![AttrValue::UInt(paper.citation_count)],
        EstimatedCitationCount => vec![AttrValue::UInt(paper.estimated_citation_count)],
        ReferenceId => paper.references.iter().copied().map(id).collect(),
        Word => paper.words.iter().map(text).collect(),
        AuthorName => paper
            .authorships
            .iter()
            .map(|a| text(&a.author_name_norm))
            .collect(),
        AuthorId => paper.authorships.iter().map(|a| id(a.author_id)).collect(),
        AffiliationName => paper
            .authorships
            .iter()
            .filter_map(|a| a.affiliation_name_norm.as_ref().map(text))
            .collect(),
        AffiliationId => paper
            .authorships
            .iter()
            .filter_map(|a| a.affiliation_id.map(id))
            .collect(),
        FieldId => paper.fields_of_study.iter().copied().map(id).collect(),
        FieldName => paper
            .fields_of_study
            .iter()
            .filter_map(|f| graph.field(*f).map(|r| text(&r.name_norm)))
            .collect(),
        JournalId => paper.journal_id.map(id).into_iter().collect(),
        JournalName => paper
            .journal_id
            .and_then(|j| graph.journal(j))
            .map(|j| text(&j.name_norm))
            .into_iter()
            .collect(),
        VenueId => paper.venue_id.map(id).into_iter().collect(),
        VenueName => paper
            .venue_id
            .and_then(|c| graph.venue(c))
            .map(|c| text(&c.name_norm))
            .into_iter()
            .collect(),
        Volume => opt_text(paper.extended.volume.as_ref()),
        Issue => opt_text(paper.extended.issue.as_ref()),
        FirstPage => opt_text(paper.extended.first_page.as_ref()),
        LastPage => opt_text(paper.extended.last_page.as_ref()),
        Doi => opt_text(paper.extended.doi.as_ref()),
        DisplayName => opt_text(paper.display_name.as_ref()),
        Description => opt_text(paper.extended.description.as_ref()),
        Sources | SourceUrl => paper
            .extended
            .sources
            .iter()
            .map(|s| AttrValue::Text(s.url.clone()))
            .collect(),
        SourceFormat => paper
            .extended
            .sources
            .iter()
            .map(|s| AttrValue::Text(s.format.clone()))
            .collect(),
        VenueDisplayName => opt_text(
            paper
                .venue_id
                .and_then(|c| graph.venue(c))
                .and_then(|c| c.display_name.as_ref()),
        ),
        VenueShortName => opt_text(
            paper
                .venue_id
                .and_then(|c| graph.venue(c))
                .and_then(|c| c.short_name.as_ref()),
        ),
    }
}

/// Comparison target with literals pre-normalized.
#[derive(Debug)]
enum Test {
    Int(CmpOp, i64),
    IntRange(i64, i64, bool, bool),
    Id(u64),
    Text(NormalizedText),
    Date(CmpOp, String),
    DateRange(String, String, bool, bool),
    Raw(String),
}

impl Test {
    fn accepts(&self, value: &AttrValue) -> bool {
        match (self, value) {
            (Test::Int(op, lit), AttrValue::Int(v)) => op.holds(v, lit),
            (Test::Int(op, lit), AttrValue::UInt(v)) => {
                op.holds(&i128::from(*v), &i128::from(*lit))
            }
            (Test::IntRange(lo, hi, li, ui), v) => {
                let v = match v {
                    AttrValue::Int(v) => i128::from(*v),
                    AttrValue::UInt(v) => i128::from(*v),
                    AttrValue::Text(_) => return false,
                };
                let (lo, hi) = (i128::from(*lo), i128::from(*hi));
                (if *li { v >= lo } else { v > lo }) && (if *ui { v <= hi } else { v < hi })
            }
            (Test::Id(lit), AttrValue::UInt(v)) => v == lit,
            (Test::Text(lit), AttrValue::Text(v)) => v == lit.as_str(),
            (Test::Date(op, lit), AttrValue::Text(v)) => op.holds(v.as_str(), lit.as_str()),
            (Test::DateRange(lo, hi, li, ui), AttrValue::Text(v)) => {
                let v = v.as_str();
                (if *li {
                    v >= lo.as_str()
                } else {
                    v > lo.as_str()
                }) && (if *ui {
                    v <= hi.as_str()
                } else {
                    v < hi.as_str()
                })
            }
            (Test::Raw(lit), AttrValue::Text(v)) => v.eq_ignore_ascii_case(lit),
            _ => false,
        }
    }
}

#[derive(Debug)]
enum Cond {
    Leaf(Attribute, Test),
    Composite(Prefix, Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

fn compile(expr: &QueryExpr) -> Result<Cond, QueryError> {
    let mismatch = |attr: Attribute, lit: &Literal| {
        QueryError::TypeMismatch(format!("{attr} cannot be compared with {lit}"))
    };
    Ok(match expr {
        QueryExpr::Compare { attr, op, value } => {
            let test = match (attr.kind(), value) {
                (AttrKind::Numeric, Literal::Int(v)) => Test::Int(*op, *v),
                (AttrKind::Id, Literal::Id(v)) if *op == CmpOp::Eq => Test::Id(*v),
                (AttrKind::Text, Literal::Str(s)) if *op == CmpOp::Eq => {
                    Test::Text(normalize_text(s))
                }
                (AttrKind::Date, Literal::Str(s)) => Test::Date(*op, s.clone()),
                (AttrKind::Raw, Literal::Str(s)) if *op == CmpOp::Eq => Test::Raw(s.clone()),
                _ => return Err(mismatch(*attr, value)),
            };
            Cond::Leaf(*attr, test)
        }
        QueryExpr::Range {
            attr,
            lower,
            upper,
            lower_inclusive,
            upper_inclusive,
        } => {
            let test = match (attr.kind(), lower, upper) {
                (AttrKind::Numeric, Literal::Int(lo), Literal::Int(hi)) => {
                    Test::IntRange(*lo, *hi, *lower_inclusive, *upper_inclusive)
                }
                (AttrKind::Date, Literal::Str(lo), Literal::Str(hi)) => {
                    Test::DateRange(lo.clone(), hi.clone(), *lower_inclusive, *upper_inclusive)
                }
                _ => return Err(mismatch(*attr, lower)),
            };
            Cond::Leaf(*attr, test)
        }
        QueryExpr::Composite { prefix, expr } => Cond::Composite(*prefix, Box::new(compile(expr)?)),
        QueryExpr::And(l, r) => Cond::And(Box::new(compile(l)?), Box::new(compile(r)?)),
        QueryExpr::Or(l, r) => Cond::Or(Box::new(compile(l)?), Box::new(compile(r)?)),
    })
}

/// One embedded record a composite condition is evaluated against.
#[derive(Clone, Copy)]
enum Embedded<'a> {
    Author(&'a Authorship),
    Field(EntityId),
    Journal(EntityId),
    Venue(EntityId),
}

fn embedded_records<'a>(paper: &'a PaperRecord, prefix: Prefix) -> Vec<Embedded<'a>> {
    match prefix {
        Prefix::AA => paper.authorships.iter().map(Embedded::Author).collect(),
        Prefix::F => paper
            .fields_of_study
            .iter()
            .copied()
            .map(Embedded::Field)
            .collect(),
        Prefix::J => paper
            .journal_id
            .map(Embedded::Journal)
            .into_iter()
            .collect(),
        Prefix::C => paper.venue_id.map(Embedded::Venue).into_iter().collect(),
    }
}

fn embedded_value(
    graph: &AcademicGraph,
    record: Embedded<'_>,
    attr: Attribute,
) -> Option<AttrValue> {
    use Attribute::*;
    let text = |t: &NormalizedText| AttrValue::Text(t.as_str().to_string());
    match (record, attr) {
        (Embedded::Author(a), AuthorName) => Some(text(&a.author_name_norm)),
        (Embedded::Author(a), AuthorId) => Some(AttrValue::UInt(a.author_id.get())),
        (Embedded::Author(a), AffiliationName) => a.affiliation_name_norm.as_ref().map(text),
        (Embedded::Author(a), AffiliationId) => a.affiliation_id.map(|i| AttrValue::UInt(i.get())),
        (Embedded::Field(f), FieldId) => Some(AttrValue::UInt(f.get())),
        (Embedded::Field(f), FieldName) => graph.field(f).map(|r| text(&r.name_norm)),
        (Embedded::Journal(j), JournalId) => Some(AttrValue::UInt(j.get())),
        (Embedded::Journal(j), JournalName) => graph.journal(j).map(|r| text(&r.name_norm)),
        (Embedded::Venue(c), VenueId) => Some(AttrValue::UInt(c.get())),
        (Embedded::Venue(c), VenueName) => graph.venue(c).map(|r| text(&r.name_norm)),
        _ => None,
    }
}

fn eval_embedded(graph: &AcademicGraph, cond: &Cond, record: Embedded<'_>) -> bool {
    match cond {
        Cond::Leaf(attr, test) => {
            embedded_value(graph, record, *attr).is_some_and(|v| test.accepts(&v))
        }
        Cond::And(l, r) => eval_embedded(graph, l, record) && eval_embedded(graph, r, record),
        Cond::Or(l, r) => eval_embedded(graph, l, record) || eval_embedded(graph, r, record),
        // rejected by the parser
        Cond::Composite(..) => false,
    }
}

fn eval_paper(graph: &AcademicGraph, cond: &Cond, paper: &PaperRecord) -> bool {
    match cond {
        Cond::Leaf(attr, test) => attribute_values(graph, paper, *attr)
            .iter()
            .any(|v| test.accepts(v)),
        Cond::Composite(prefix, inner) => embedded_records(paper, *prefix)
            .into_iter()
            .any(|rec| eval_embedded(graph, inner, rec)),
        Cond::And(l, r) => eval_paper(graph, l, paper) && eval_paper(graph, r, paper),
        Cond::Or(l, r) => eval_paper(graph, l, paper) || eval_paper(graph, r, paper),
    }
}

/// Whether a single paper satisfies `expr`.
pub fn matches(
    graph: &AcademicGraph,
    expr: &QueryExpr,
    paper: &PaperRecord,
) -> Result<bool, QueryError> {
    Ok(eval_paper(graph, &compile(expr)?, paper))
}

/// All matching papers in canonical order (descending ECC, ascending id).
pub fn matching_papers<'g>(
    graph: &'g AcademicGraph,
    expr: &QueryExpr,
) -> Result<Vec<&'g PaperRecord>, QueryError> {
    let cond = compile(expr)?;
    Ok(graph
        .ranked_papers()
        .filter(|p| eval_paper(graph, &cond, p))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedEntity {
    pub logprob: f64,
    pub id: EntityId,
    /// Requested attributes, keyed as in the wire format.
    pub attributes: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateResponse {
    pub expr_echo: String,
    pub entities: Vec<EvaluatedEntity>,
}

impl EvaluateResponse {
    pub fn to_json(&self) -> Value {
        let entities = self
            .entities
            .iter()
            .map(|e| {
                let mut obj = Map::new();
                obj.insert("logprob".into(), Value::from(e.logprob));
                obj.insert("Id".into(), Value::from(e.id.get()));
                for (k, v) in &e.attributes {
                    obj.insert(k.clone(), v.clone());
                }
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("expr".into(), Value::from(self.expr_echo.as_str()));
        root.insert("entities".into(), Value::Array(entities));
        Value::Object(root)
    }
}

/// `-ln(1 + rank)` for a 0-based static rank.
pub fn logprob_for_rank(rank: usize) -> f64 {
    0.0 - ((1 + rank) as f64).ln()
}

pub fn evaluate(
    graph: &AcademicGraph,
    query: &Query,
    count: usize,
    offset: usize,
    attributes: &[Attribute],
) -> Result<EvaluateResponse, QueryError> {
    let matched = matching_papers(graph, &query.expr)?;
    let entities = matched
        .into_iter()
        .skip(offset)
        .take(count)
        .map(|p| EvaluatedEntity {
            logprob: logprob_for_rank(graph.rank_of(p.id).unwrap_or(0)),
            id: p.id,
            attributes: select_attributes(graph, p, attributes),
        })
        .collect();
    Ok(EvaluateResponse {
        expr_echo: query.text.clone(),
        entities,
    })
}

/// Build the response object for the requested attributes.
///
/// Top-level paper attributes map to their own key. Author and field
/// attributes become arrays of objects under `AA` / `F`, journal and venue
/// attributes objects under `J` / `C`, extended attributes an object under
/// `E`. `Id` is emitted separately and skipped here.
pub fn select_attributes(
    graph: &AcademicGraph,
    paper: &PaperRecord,
    attributes: &[Attribute],
) -> Map<String, Value> {
    use Attribute::*;
    let mut out = Map::new();
    let mut aa: Vec<Attribute> = Vec::new();
    let mut f: Vec<Attribute> = Vec::new();
    let mut j: Vec<Attribute> = Vec::new();
    let mut c: Vec<Attribute> = Vec::new();
    let mut e: Vec<Attribute> = Vec::new();

    for &attr in attributes {
        let group = match (attr.prefix(), attr.is_extended()) {
            (Some(Prefix::AA), _) => &mut aa,
            (Some(Prefix::F), _) => &mut f,
            (Some(Prefix::J), _) => &mut j,
            (Some(Prefix::C), _) => &mut c,
            (None, true) => &mut e,
            (None, false) => {
                if attr == Id {
                    continue;
                }
                let values = attribute_values(graph, paper, attr);
                let json = match attr {
                    ReferenceId | Word => {
                        Value::Array(values.iter().map(AttrValue::to_json).collect())
                    }
                    _ => match values.first() {
                        Some(v) => v.to_json(),
                        None => continue,
                    },
                };
                out.insert(attr.path().to_string(), json);
                continue;
            }
        };
        let key = match attr.prefix() {
            Some(p) => p.as_str(),
            None => "E",
        };
        if !group.contains(&attr) {
            group.push(attr);
        }
        if !out.contains_key(key) {
            out.insert(key.to_string(), Value::Null);
        }
    }

    let fill = |record: Embedded<'_>, attrs: &[Attribute]| {
        let mut obj = Map::new();
        for &a in attrs {
            if let Some(v) = embedded_value(graph, record, a) {
                obj.insert(a.leaf().to_string(), v.to_json());
            }
        }
        Value::Object(obj)
    };

    let mut finished = Map::new();
    for (key, value) in out {
        let value = match key.as_str() {
            "AA" => Value::Array(
                embedded_records(paper, Prefix::AA)
                    .into_iter()
                    .map(|r| fill(r, &aa))
                    .collect(),
            ),
            "F" => Value::Array(
                embedded_records(paper, Prefix::F)
                    .into_iter()
                    .map(|r| fill(r, &f))
                    .collect(),
            ),
            "J" => match embedded_records(paper, Prefix::J).first() {
                Some(r) => fill(*r, &j),
                None => continue,
            },
            "C" => match embedded_records(paper, Prefix::C).first() {
                Some(r) => fill(*r, &c),
                None => continue,
            },
            "E" => extended_object(graph, paper, &e),
            _ => value,
        };
        finished.insert(key, value);
    }
    finished
}

fn extended_object(graph: &AcademicGraph, paper: &PaperRecord, attrs: &[Attribute]) -> Value {
    use Attribute::*;
    let mut obj = Map::new();
    let want_ty = attrs.iter().any(|a| matches!(a, Sources | SourceFormat));
    let want_url = attrs.iter().any(|a| matches!(a, Sources | SourceUrl));
    for &a in attrs {
        match a {
            Sources | SourceFormat | SourceUrl => {
                if obj.contains_key("S") {
                    continue;
                }
                let sources = paper
                    .extended
                    .sources
                    .iter()
                    .map(|s| {
                        let mut o = Map::new();
                        if want_ty {
                            o.insert("Ty".into(), Value::from(s.format.as_str()));
                        }
                        if want_url {
                            o.insert("U".into(), Value::from(s.url.as_str()));
                        }
                        Value::Object(o)
                    })
                    .collect();
                obj.insert("S".into(), Value::Array(sources));
            }
            _ => {
                if let Some(v) = attribute_values(graph, paper, a).into_iter().next() {
                    obj.insert(a.leaf().to_string(), v.to_json());
                }
            }
        }
    }
    Value::Object(obj)
}
