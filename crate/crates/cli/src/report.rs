//! Comparison and audit reports plus their table, JSON and CSV renderings.

use std::fmt::Write as _;

use akg_core::audit::{display_percent, AuditReport, MatchKey};
use akg_core::graph::EntityId;
use akg_core::indicators::{AuthorReport, PercentilePool, PrClass, PrScheme, ReferenceSet};
use serde_json::{json, Map, Value};

use crate::args::YearRange;

pub struct AuthorEntry {
    pub report: AuthorReport,
    pub rank: usize,
}

pub struct DatabaseReport {
    pub label: String,
    pub journal_id: EntityId,
    pub journal_name: String,
    pub issn: Option<String>,
    pub refset: ReferenceSet,
    pub authors: Vec<AuthorEntry>,
}

pub struct AuditSummary {
    pub label_a: String,
    pub label_b: String,
    pub match_key: MatchKey,
    pub report: AuditReport,
}

pub struct ComparisonReport {
    pub years: YearRange,
    pub scheme: PrScheme,
    pub pool: PercentilePool,
    pub databases: Vec<DatabaseReport>,
    pub audit: Option<AuditSummary>,
}

/// Which blocks a table rendering includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sections {
    All,
    JncsOnly,
    PrOnly,
}

fn pool_name(pool: PercentilePool) -> &'static str {
    match pool {
        PercentilePool::Pooled => "pooled",
        PercentilePool::PerYear => "per-year",
    }
}

fn class_count(report: &AuthorReport, class: PrClass) -> usize {
    report
        .publications
        .iter()
        .filter(|p| p.pr_class == Some(class))
        .count()
}

/// Integer percent, half away from zero.
fn int_percent(v: f64) -> String {
    format!("{}", v.round() as i64)
}

fn pad_table(rows: &[Vec<String>], right_from: usize) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let pad = widths[c] - cell.chars().count();
            if c >= right_from {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            } else {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

impl ComparisonReport {
    fn journal_line(&self) -> String {
        let db = &self.databases[0];
        let issn = db
            .issn
            .as_deref()
            .map(|i| format!(", ISSN {i}"))
            .unwrap_or_default();
        format!(
            "Journal: {}{issn}; publication years {}-{}",
            db.journal_name, self.years.first, self.years.last
        )
    }

    pub fn to_table(&self, sections: Sections) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.journal_line());
        for db in &self.databases {
            let _ = writeln!(
                out,
                "{}: journal {} \"{}\", reference set {} papers",
                db.label,
                db.journal_id,
                db.journal_name,
                db.refset.pooled.size()
            );
        }

        if sections != Sections::PrOnly {
            out.push('\n');
            out.push_str("Table 1. Journal normalized citation score (JNCS) of researchers' publications\n\n");
            let mut header = vec!["Researcher".to_string()];
            for db in &self.databases {
                header.push(format!("{} JNCS", db.label));
                header.push(format!("{} Rank", db.label));
            }
            let mut rows = vec![header];
            for (i, entry) in self.databases[0].authors.iter().enumerate() {
                let mut row = vec![entry.report.author.clone()];
                for db in &self.databases {
                    let a = &db.authors[i];
                    row.push(format!("{:.2}", a.report.jncs));
                    row.push(a.rank.to_string());
                }
                rows.push(row);
            }
            out.push_str(&pad_table(&rows, 1));
            out.push_str("JNCS 1.00 = journal average; rank by JNCS, highest first.\n");
        }

        if sections != Sections::JncsOnly {
            out.push('\n');
            let _ = writeln!(
                out,
                "Table 2. Publications of researchers in percentile rank classes (boundaries {}, {} percentiles)\n",
                self.scheme,
                pool_name(self.pool)
            );
            let mut header = vec![
                "Researcher".to_string(),
                "PR class".into(),
                "Percentile interval".into(),
            ];
            for db in &self.databases {
                header.push(format!("{} n", db.label));
                header.push(format!("{} %", db.label));
            }
            let mut rows = vec![header];
            for (i, entry) in self.databases[0].authors.iter().enumerate() {
                for (k, class) in PrClass::DESCENDING.into_iter().enumerate() {
                    let name = if k == 0 {
                        entry.report.author.clone()
                    } else {
                        String::new()
                    };
                    let mut row = vec![
                        name,
                        class.number().to_string(),
                        self.scheme.interval_label(class),
                    ];
                    for db in &self.databases {
                        let a = &db.authors[i].report;
                        row.push(class_count(a, class).to_string());
                        row.push(int_percent(a.pr_shares.share(class)));
                    }
                    rows.push(row);
                }
                let mut total = vec![String::new(), "Total".into(), String::new()];
                for db in &self.databases {
                    let a = &db.authors[i].report;
                    total.push(a.scored_count().to_string());
                    total.push(int_percent(a.pr_shares.total()));
                }
                rows.push(total);
            }
            out.push_str(&pad_table(&rows, 3));
        }

        if sections == Sections::All {
            if let Some(audit) = &self.audit {
                out.push('\n');
                out.push_str(&audit_table(audit));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let databases: Vec<Value> = self.databases.iter().map(database_json).collect();
        let mut root = Map::new();
        root.insert("years".into(), json!([self.years.first, self.years.last]));
        root.insert("scheme".into(), Value::from(self.scheme.to_string()));
        root.insert("pool".into(), Value::from(pool_name(self.pool)));
        root.insert("databases".into(), Value::Array(databases));
        if let Some(audit) = &self.audit {
            root.insert("audit".into(), audit_json(audit));
        }
        Value::Object(root)
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "database",
            "author",
            "jncs",
            "rank",
            "pr4",
            "pr3",
            "pr2",
            "pr1",
            "n_scored",
            "n_excluded",
        ])?;
        for db in &self.databases {
            for a in &db.authors {
                let r = &a.report;
                let shares = PrClass::DESCENDING.map(|c| r.pr_shares.share(c).to_string());
                w.write_record([
                    db.label.clone(),
                    r.author.clone(),
                    r.jncs.to_string(),
                    a.rank.to_string(),
                    shares[0].clone(),
                    shares[1].clone(),
                    shares[2].clone(),
                    shares[3].clone(),
                    r.scored_count().to_string(),
                    r.excluded.len().to_string(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn database_json(db: &DatabaseReport) -> Value {
    let cells: Vec<Value> = db
        .refset
        .cells
        .iter()
        .map(|(year, dist)| json!({ "year": year, "size": dist.size(), "mean": dist.mean() }))
        .collect();
    let authors: Vec<Value> = db
        .authors
        .iter()
        .map(|a| {
            let r = &a.report;
            let pubs: Vec<Value> = r
                .publications
                .iter()
                .map(|p| {
                    json!({
                        "id": p.paper_id,
                        "year": p.year,
                        "citations": p.citations,
                        "journal_year_mean": p.journal_year_mean,
                        "normalized_score": p.normalized_score,
                        "percentile": p.percentile,
                        "class": p.pr_class.map(PrClass::number),
                    })
                })
                .collect();
            json!({
                "author": r.author,
                "jncs": r.jncs,
                "rank": a.rank,
                "pr_shares": r.pr_shares,
                "n_scored": r.scored_count(),
                "n_excluded": r.excluded.len(),
                "publications": pubs,
                "excluded": r.excluded,
            })
        })
        .collect();
    json!({
        "label": db.label,
        "journal_id": db.journal_id,
        "journal_name": db.journal_name,
        "issn": db.issn,
        "reference_set": { "size": db.refset.pooled.size(), "cells": cells },
        "authors": authors,
    })
}

pub fn audit_json(audit: &AuditSummary) -> Value {
    let r = &audit.report;
    let coverage: Vec<Value> = r
        .author_coverage
        .iter()
        .map(|c| {
            json!({
                "author": c.author,
                "pairs": c.pairs,
                "percent_a": c.percent_a,
                "percent_b": c.percent_b,
                "missing_percent_a": c.missing_percent_a(),
                "missing_percent_b": c.missing_percent_b(),
                "missing_a": c.missing_a,
                "missing_b": c.missing_b,
            })
        })
        .collect();
    json!({
        "label_a": audit.label_a,
        "label_b": audit.label_b,
        "match_key": audit.match_key,
        "candidates": r.candidates,
        "matched": r.matched,
        "unmatched_a": r.unmatched_a,
        "unmatched_b": r.unmatched_b,
        "year_mismatches": r.year_mismatches,
        "year_mismatch_rate": r.year_mismatch_rate,
        "year_mismatch_rate_display": format!("{}%", display_percent(r.year_mismatch_rate)),
        "author_coverage": coverage,
    })
}

pub fn audit_table(audit: &AuditSummary) -> String {
    let r = &audit.report;
    let (a, b) = (&audit.label_a, &audit.label_b);
    let mut out = String::new();
    let key = match audit.match_key {
        MatchKey::Title => "normalized title",
        MatchKey::Doi => "DOI",
    };
    let _ = writeln!(out, "Audit: {a} against {b}, matched by {key}");
    let _ = writeln!(
        out,
        "Candidates in {a}: {}; matched: {}; unmatched in {a}: {}; unpaired in {b}: {}",
        r.candidates,
        r.matched,
        r.unmatched_a.len(),
        r.unmatched_b.len()
    );
    let minus = r.year_mismatches.iter().filter(|m| m.delta < 0).count();
    let plus = r.year_mismatches.len() - minus;
    let _ = writeln!(
        out,
        "Publication year differs: {} of {} pairs ({}%); {b} earlier: {minus}, {b} later: {plus}",
        r.year_mismatches.len(),
        r.matched,
        display_percent(r.year_mismatch_rate)
    );
    if !r.author_coverage.is_empty() {
        out.push('\n');
        let mut rows = vec![vec![
            "Author".to_string(),
            "Pairs".into(),
            format!("Listed {a}"),
            format!("Listed {b}"),
            format!("Missing {a}"),
            format!("Missing {b}"),
        ]];
        for c in &r.author_coverage {
            rows.push(vec![
                c.author.to_string(),
                c.pairs.to_string(),
                format!("{}%", display_percent(c.percent_a)),
                format!("{}%", display_percent(c.percent_b)),
                format!("{}%", display_percent(c.missing_percent_a())),
                format!("{}%", display_percent(c.missing_percent_b())),
            ]);
        }
        out.push_str(&pad_table(&rows, 1));
    }
    out
}
