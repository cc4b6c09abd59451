//! The `akg` command-line driver.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unparsable query
//! expressions), 2 on data errors (unloadable snapshots, unknown journals,
//! empty reference sets, researchers without scorable publications).

pub mod args;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use akg_core::audit::{audit, MatchKey};
use akg_core::indicators::{author_report, build_reference_set, rank_by_jncs, Publication};
use akg_core::ingest::{load_path, LoadReport};
use akg_core::query::{
    matching_papers, parse_attribute_list, Attribute, CmpOp, Literal, Prefix, QueryExpr,
};
use akg_core::{
    calc_histogram, evaluate, normalize_text, AcademicGraph, CitationMode, EntityId,
    HistogramError, Query, QueryOptions, RequestCap,
};
use clap::error::ErrorKind;
use clap::Parser;

use crate::args::*;
use crate::report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn data(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parse `args` (program name first), run the command and return the exit
/// code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let ctx = LoadContext {
        strict: cli.strict,
        mode: if cli.derive_cc {
            CitationMode::Derived
        } else {
            CitationMode::Stored
        },
    };
    let text = match &cli.command {
        Command::Load(a) => cmd_load(&ctx, a)?,
        Command::Evaluate(a) => cmd_evaluate(&ctx, a)?,
        Command::Histogram(a) => cmd_histogram(&ctx, a)?,
        Command::Jncs(a) => cmd_indicator(&ctx, a, Sections::JncsOnly)?,
        Command::Prclasses(a) => cmd_indicator(&ctx, a, Sections::PrOnly)?,
        Command::Compare(a) => cmd_compare(&ctx, a)?,
        Command::Audit(a) => cmd_audit(&ctx, a)?,
        Command::Serve(a) => return cmd_serve(&ctx, a),
    };
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| data(format!("cannot write output: {e}")))
}

struct LoadContext {
    strict: bool,
    mode: CitationMode,
}

impl LoadContext {
    fn load(&self, path: &Path) -> Result<(AcademicGraph, LoadReport)> {
        load_path(path, self.strict, self.mode)
            .map_err(|e| data(format!("{}: {e}", path.display())))
    }
}

fn to_json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn cmd_load(ctx: &LoadContext, a: &LoadArgs) -> Result<String> {
    let (graph, report) = ctx.load(&a.snapshot)?;
    match a.format {
        Format::Json => Ok(to_json_text(
            &serde_json::to_value(&report).expect("report serializes"),
        )),
        Format::Csv => {
            let mut s = String::from("file,loaded,dropped\n");
            for (file, c) in &report.files {
                s.push_str(&format!("{file},{},{}\n", c.loaded, c.dropped));
            }
            Ok(s)
        }
        Format::Table => {
            let mut s = format!("Snapshot {}\n", a.snapshot.display());
            s.push_str(&format!(
                "papers {}  journals {}  venues {}  fields {}\n",
                graph.paper_count(),
                report.journals,
                report.venues,
                report.fields
            ));
            for (file, c) in &report.files {
                s.push_str(&format!(
                    "  {file:<20} loaded {:>7}  dropped {:>5}\n",
                    c.loaded, c.dropped
                ));
            }
            s.push_str(&format!(
                "dangling references {}  normalization warnings {}  hierarchy flags {}  citation counts changed {}\n",
                report.dangling_references,
                report.normalization_warnings,
                report.hierarchy_flags,
                report.citation_counts_changed
            ));
            for w in &report.warnings {
                s.push_str(&format!("warning: {w}\n"));
            }
            Ok(s)
        }
    }
}

fn parse_query(text: &str, extended: bool) -> Result<Query> {
    Query::parse(
        text,
        QueryOptions {
            extended_query: extended,
        },
    )
    .map_err(|e| usage(format!("--expr {text:?}: {} ({e})", e.code())))
}

fn parse_attrs(list: &str) -> Result<Vec<Attribute>> {
    parse_attribute_list(list).map_err(|e| usage(format!("--attributes {list:?}: {e}")))
}

fn cmd_evaluate(ctx: &LoadContext, a: &EvaluateArgs) -> Result<String> {
    let query = parse_query(&a.query.expr, a.query.extended_query)?;
    let attrs = parse_attrs(&a.attributes)?;
    let (graph, _) = ctx.load(&a.query.snapshot)?;
    let resp =
        evaluate(&graph, &query, a.count, a.offset, &attrs).map_err(|e| usage(e.to_string()))?;
    Ok(to_json_text(&resp.to_json()))
}

fn cmd_histogram(ctx: &LoadContext, a: &HistogramArgs) -> Result<String> {
    let query = parse_query(&a.query.expr, a.query.extended_query)?;
    let attrs = parse_attrs(&a.attributes)?;
    if attrs.is_empty() {
        return Err(usage("--attributes must name at least one attribute"));
    }
    let cap = cap_from(a.cap)?;
    let (graph, _) = ctx.load(&a.query.snapshot)?;
    let resp = calc_histogram(&graph, &query, &attrs, cap).map_err(|e| match e {
        HistogramError::Query(q) => usage(q.to_string()),
        cap @ HistogramError::CapExceeded { .. } => data(cap.to_string()),
    })?;
    Ok(to_json_text(&resp.to_json()))
}

fn cap_from(cap: Option<usize>) -> Result<RequestCap> {
    match cap {
        None => Ok(RequestCap::default()),
        Some(n) => RequestCap::new(n).ok_or_else(|| usage("--cap must be positive")),
    }
}

enum JournalSel<'a> {
    Id(u64),
    Issn(&'a str),
}

fn resolve_journal(
    graph: &AcademicGraph,
    label: &str,
    sel: &JournalSel<'_>,
) -> Result<(EntityId, String, Option<String>)> {
    let record = match sel {
        JournalSel::Id(id) => EntityId::new(*id).and_then(|id| graph.journal(id)),
        JournalSel::Issn(issn) => graph.journal_by_issn(issn),
    };
    let record = record.ok_or_else(|| {
        data(match sel {
            JournalSel::Id(id) => format!("{label}: no journal with id {id}"),
            JournalSel::Issn(issn) => format!("{label}: no journal with ISSN {issn}"),
        })
    })?;
    let name = record
        .display_name
        .clone()
        .unwrap_or_else(|| record.name_norm.to_string());
    Ok((record.id, name, record.issn.clone()))
}

/// `And(And(Composite(AA.AuN=name), J.JId=journal), Y=[first,last])`
pub fn author_publications_expr(author: &str, journal: EntityId, years: YearRange) -> QueryExpr {
    QueryExpr::and(
        QueryExpr::and(
            QueryExpr::composite(
                Prefix::AA,
                QueryExpr::compare(
                    Attribute::AuthorName,
                    CmpOp::Eq,
                    Literal::Str(author.to_string()),
                ),
            ),
            QueryExpr::compare(Attribute::JournalId, CmpOp::Eq, Literal::Id(journal.get())),
        ),
        QueryExpr::closed_range(
            Attribute::Year,
            Literal::Int(years.first.into()),
            Literal::Int(years.last.into()),
        ),
    )
}

fn database_report(
    graph: &AcademicGraph,
    label: &str,
    sel: &JournalSel<'_>,
    opts: &IndicatorOptions,
) -> Result<(DatabaseReport, Vec<EntityId>)> {
    let (journal_id, journal_name, issn) = resolve_journal(graph, label, sel)?;
    let years = opts.years;
    let refset = build_reference_set(
        graph,
        journal_id,
        years.first,
        years.last,
        RequestCap::default(),
    )
    .map_err(|e| data(format!("{label}: {e}")))?;
    let mut reports = Vec::new();
    let mut all_pubs = Vec::new();
    for author in &opts.authors {
        let expr = author_publications_expr(author, journal_id, years);
        let mut papers =
            matching_papers(graph, &expr).map_err(|e| data(format!("{label}: {e}")))?;
        papers.sort_by_key(|p| (p.year, p.id));
        let pubs: Vec<Publication> = papers
            .iter()
            .map(|p| Publication {
                paper_id: Some(p.id),
                year: p.year,
                citations: p.citation_count,
            })
            .collect();
        all_pubs.extend(papers.iter().map(|p| p.id));
        let report = author_report(author, &pubs, &refset, &opts.scheme, opts.percentile_pool)
            .map_err(|e| {
                data(format!(
                    "{label}: author {author:?} in journal {journal_id} over {}-{}: {e}",
                    years.first, years.last
                ))
            })?;
        reports.push(report);
    }
    let ranks = rank_by_jncs(&reports);
    let authors = reports
        .into_iter()
        .zip(ranks)
        .map(|(report, (_, rank))| AuthorEntry { report, rank })
        .collect();
    all_pubs.sort();
    all_pubs.dedup();
    Ok((
        DatabaseReport {
            label: label.to_string(),
            journal_id,
            journal_name,
            issn,
            refset,
            authors,
        },
        all_pubs,
    ))
}

fn journal_a(opts: &IndicatorOptions) -> JournalSel<'_> {
    match (&opts.journal.journal_id, &opts.journal.issn) {
        (Some(id), _) => JournalSel::Id(*id),
        (None, Some(issn)) => JournalSel::Issn(issn),
        (None, None) => unreachable!("clap requires one journal key"),
    }
}

fn render(report: &ComparisonReport, format: Format, sections: Sections) -> Result<String> {
    match format {
        Format::Table => Ok(report.to_table(sections)),
        Format::Json => Ok(to_json_text(&report.to_json())),
        Format::Csv => report
            .to_csv()
            .map_err(|e| data(format!("cannot write CSV: {e}"))),
    }
}

fn cmd_indicator(ctx: &LoadContext, a: &IndicatorArgs, sections: Sections) -> Result<String> {
    let (graph, _) = ctx.load(&a.snapshot)?;
    let (db, _) = database_report(&graph, &a.label, &journal_a(&a.options), &a.options)?;
    let report = ComparisonReport {
        years: a.options.years,
        scheme: a.options.scheme,
        pool: a.options.percentile_pool,
        databases: vec![db],
        audit: None,
    };
    render(&report, a.options.format, sections)
}

fn match_key(arg: MatchKeyArg, extended: bool) -> Result<MatchKey> {
    match arg {
        MatchKeyArg::Title => Ok(MatchKey::Title),
        MatchKeyArg::Doi if extended => Ok(MatchKey::Doi),
        MatchKeyArg::Doi => Err(usage("--match-key doi requires --extended-query")),
    }
}

fn cmd_compare(ctx: &LoadContext, a: &CompareArgs) -> Result<String> {
    let key = match_key(a.match_key, a.extended_query)?;
    let opts = &a.options;
    let (graph_a, _) = ctx.load(&a.db_a)?;
    let (db_a, pubs_a) = database_report(&graph_a, &a.label_a, &journal_a(opts), opts)?;
    let mut databases = vec![db_a];
    let mut audit_summary = None;
    if let Some(path_b) = &a.db_b {
        let (graph_b, _) = ctx.load(path_b)?;
        let sel_b = match (&a.journal_id_b, &a.issn_b) {
            (Some(id), _) => JournalSel::Id(*id),
            (None, Some(issn)) => JournalSel::Issn(issn),
            (None, None) => journal_a(opts),
        };
        let (db_b, _) = database_report(&graph_b, &a.label_b, &sel_b, opts)?;
        databases.push(db_b);
        let names: Vec<_> = opts.authors.iter().map(|n| normalize_text(n)).collect();
        let report = audit(&graph_a, &graph_b, &pubs_a, &names, key)
            .map_err(|e| data(format!("audit of {} against {}: {e}", a.label_a, a.label_b)))?;
        audit_summary = Some(AuditSummary {
            label_a: a.label_a.clone(),
            label_b: a.label_b.clone(),
            match_key: key,
            report,
        });
    }
    let report = ComparisonReport {
        years: opts.years,
        scheme: opts.scheme,
        pool: opts.percentile_pool,
        databases,
        audit: audit_summary,
    };
    render(&report, opts.format, Sections::All)
}

fn cmd_audit(ctx: &LoadContext, a: &AuditArgs) -> Result<String> {
    let key = match_key(a.match_key, a.extended_query)?;
    let candidates_query = a
        .candidates
        .as_deref()
        .map(|q| parse_query(q, a.extended_query))
        .transpose()?;
    let (graph_a, _) = ctx.load(&a.db_a)?;
    let (graph_b, _) = ctx.load(&a.db_b)?;
    let candidates: Vec<EntityId> = match &candidates_query {
        Some(q) => matching_papers(&graph_a, &q.expr)
            .map_err(|e| usage(e.to_string()))?
            .iter()
            .map(|p| p.id)
            .collect(),
        None => graph_a.papers().map(|p| p.id).collect(),
    };
    let names: Vec<_> = a.authors.iter().map(|n| normalize_text(n)).collect();
    let report = audit(&graph_a, &graph_b, &candidates, &names, key)
        .map_err(|e| data(format!("audit of {} against {}: {e}", a.label_a, a.label_b)))?;
    let summary = AuditSummary {
        label_a: a.label_a.clone(),
        label_b: a.label_b.clone(),
        match_key: key,
        report,
    };
    match a.format {
        Format::Table => Ok(audit_table(&summary)),
        Format::Json => Ok(to_json_text(&audit_json(&summary))),
        Format::Csv => Err(usage("--format csv is not available for audit")),
    }
}

fn cmd_serve(ctx: &LoadContext, a: &ServeArgs) -> Result<()> {
    let config = akg_service::ServiceConfig {
        bind: a.bind,
        port: a.port,
        snapshot: Some(a.snapshot.clone()),
        strict: ctx.strict,
        citation_mode: ctx.mode,
        cap: cap_from(a.cap)?,
        default_count: a.default_count,
        max_count: a.max_count,
        extended_query: a.extended_query,
    };
    config.validate().map_err(usage)?;
    let state = Arc::new(akg_service::AppState::new(config));
    state.reload().map_err(|e| data(e.to_string()))?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| data(format!("cannot start runtime: {e}")))?;
    runtime
        .block_on(akg_service::serve(state))
        .map_err(|e| data(format!("server error: {e}")))
}
