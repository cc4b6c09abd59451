//! CalcHistogram: value distributions of paper attributes over a query's
//! match set.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::error::{HistogramError, QueryError};
use crate::graph::AcademicGraph;
use crate::query::{attribute_values, matching_papers, AttrValue, Attribute, Query};

pub const DEFAULT_MAX_ENTITIES: usize = 2_400_000;

/// Upper bound on the number of matched entities one request may analyze.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestCap {
    max_entities: usize,
}

impl RequestCap {
    pub fn new(max_entities: usize) -> Option<Self> {
        (max_entities > 0).then_some(Self { max_entities })
    }

    pub fn max_entities(self) -> usize {
        self.max_entities
    }
}

impl Default for RequestCap {
    fn default() -> Self {
        Self {
            max_entities: DEFAULT_MAX_ENTITIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeHistogram {
    pub attribute: Attribute,
    /// Sorted by descending count, ties by ascending value.
    pub entries: Vec<(AttrValue, u64)>,
}

impl AttributeHistogram {
    pub fn distinct_values(&self) -> usize {
        self.entries.len()
    }

    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    /// Σ value × count for numeric attributes; `None` for text.
    pub fn weighted_sum(&self) -> Option<u128> {
        self.entries.iter().try_fold(0u128, |acc, (v, c)| {
            let v = match v {
                AttrValue::UInt(v) => u128::from(*v),
                AttrValue::Int(v) => u128::try_from(*v).ok()?,
                AttrValue::Text(_) => return None,
            };
            Some(acc + v * u128::from(*c))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramResponse {
    pub expr_echo: String,
    pub num_entities: usize,
    pub histograms: Vec<AttributeHistogram>,
}

impl HistogramResponse {
    pub fn histogram(&self, attribute: Attribute) -> Option<&AttributeHistogram> {
        self.histograms.iter().find(|h| h.attribute == attribute)
    }

    pub fn to_json(&self) -> Value {
        let histograms = self
            .histograms
            .iter()
            .map(|h| {
                let mut obj = Map::new();
                obj.insert("attribute".into(), Value::from(h.attribute.path()));
                obj.insert("distinct_values".into(), Value::from(h.distinct_values()));
                obj.insert("total_count".into(), Value::from(h.total_count()));
                let entries = h
                    .entries
                    .iter()
                    .map(|(v, c)| {
                        let mut e = Map::new();
                        e.insert("value".into(), v.to_json());
                        e.insert("count".into(), Value::from(*c));
                        Value::Object(e)
                    })
                    .collect();
                obj.insert("histogram".into(), Value::Array(entries));
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("expr".into(), Value::from(self.expr_echo.as_str()));
        root.insert("num_entities".into(), Value::from(self.num_entities));
        root.insert("histograms".into(), Value::Array(histograms));
        Value::Object(root)
    }
}

pub fn calc_histogram(
    graph: &AcademicGraph,
    query: &Query,
    attributes: &[Attribute],
    cap: RequestCap,
) -> Result<HistogramResponse, HistogramError> {
    if let Some(bad) = attributes.iter().find(|a| !a.is_histogrammable()) {
        return Err(QueryError::NotHistogrammable(bad.path().to_string()).into());
    }
    let matched = matching_papers(graph, &query.expr)?;
    if matched.len() > cap.max_entities() {
        return Err(HistogramError::CapExceeded {
            num_entities: matched.len(),
            cap: cap.max_entities(),
        });
    }

    let mut attrs: Vec<Attribute> = Vec::with_capacity(attributes.len());
    for a in attributes {
        if !attrs.contains(a) {
            attrs.push(*a);
        }
    }

    let histograms = attrs
        .into_iter()
        .map(|attribute| {
            let mut counts: BTreeMap<AttrValue, u64> = BTreeMap::new();
            for paper in &matched {
                for value in attribute_values(graph, paper, attribute) {
                    *counts.entry(value).or_default() += 1;
                }
            }
            let mut entries: Vec<(AttrValue, u64)> = counts.into_iter().collect();
            // BTreeMap order is ascending value; stable sort keeps it for ties
            entries.sort_by_key(|e| std::cmp::Reverse(e.1));
            AttributeHistogram { attribute, entries }
        })
        .collect();

    Ok(HistogramResponse {
        expr_echo: query.text.clone(),
        num_entities: matched.len(),
        histograms,
    })
}
