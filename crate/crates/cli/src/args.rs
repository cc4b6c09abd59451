use std::net::IpAddr;
use std::path::PathBuf;
use std::str::FromStr;

use akg_core::indicators::{PercentilePool, PrScheme};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "akg",
    version,
    about = "Query academic graph snapshots and compute citation indicators"
)]
pub struct Cli {
    /// Abort on the first malformed snapshot row.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Recompute citation counts from the loaded references.
    #[arg(long, global = true)]
    pub derive_cc: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a snapshot and print the load report.
    Load(LoadArgs),
    /// Run an Evaluate request.
    Evaluate(EvaluateArgs),
    /// Run a CalcHistogram request.
    Histogram(HistogramArgs),
    /// Journal normalized citation scores for researchers.
    Jncs(IndicatorArgs),
    /// Percentile rank class shares for researchers.
    Prclasses(IndicatorArgs),
    /// JNCS and PR-class report, side by side for two snapshots.
    Compare(CompareArgs),
    /// Match publications across two snapshots and report discrepancies.
    Audit(AuditArgs),
    /// Serve the HTTP API over a snapshot.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatchKeyArg {
    Title,
    Doi,
}

/// Inclusive year range written `2010-2014` or a single year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

impl FromStr for YearRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once('-').unwrap_or((s, s));
        let year = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| format!("invalid year {t:?} in {s:?}; expected e.g. 2010-2014"))
        };
        let (first, last) = (year(a)?, year(b)?);
        if first > last {
            return Err(format!("first year {first} is after last year {last}"));
        }
        Ok(Self { first, last })
    }
}

#[derive(Debug, Args)]
pub struct LoadArgs {
    /// Snapshot directory or JSON fixture file.
    pub snapshot: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Query expression, e.g. "And(J.JId=1,Y=[2010,2014])".
    #[arg(long)]
    pub expr: String,
    /// Allow E.DOI in query expressions.
    #[arg(long)]
    pub extended_query: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    #[arg(long, default_value = "Id,Ti")]
    pub attributes: String,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub attributes: String,
    /// Maximum number of matched entities.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
#[group(id = "journal_a", required = true, multiple = false)]
pub struct JournalKey {
    #[arg(long, group = "journal_a")]
    pub journal_id: Option<u64>,
    #[arg(long, group = "journal_a")]
    pub issn: Option<String>,
}

#[derive(Debug, Args)]
pub struct IndicatorOptions {
    #[command(flatten)]
    pub journal: JournalKey,
    /// Publication years, inclusive.
    #[arg(long)]
    pub years: YearRange,
    /// Researcher name as stored in the snapshot; repeat for several.
    #[arg(long = "author", required = true)]
    pub authors: Vec<String>,
    /// Percentile boundaries of PR classes 2, 3 and 4.
    #[arg(long, default_value = "50,80,90")]
    pub scheme: PrScheme,
    #[arg(long, default_value = "pooled")]
    pub percentile_pool: PercentilePool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct IndicatorArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long, default_value = "A")]
    pub label: String,
    #[command(flatten)]
    pub options: IndicatorOptions,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub db_a: PathBuf,
    #[arg(long)]
    pub db_b: Option<PathBuf>,
    #[arg(long, default_value = "A")]
    pub label_a: String,
    #[arg(long, default_value = "B")]
    pub label_b: String,
    /// Journal id in the second snapshot, if it differs.
    #[arg(long, conflicts_with = "issn_b", requires = "db_b")]
    pub journal_id_b: Option<u64>,
    /// ISSN in the second snapshot, if it differs.
    #[arg(long, requires = "db_b")]
    pub issn_b: Option<String>,
    #[arg(long, value_enum, default_value = "title")]
    pub match_key: MatchKeyArg,
    /// Needed for `--match-key doi`.
    #[arg(long)]
    pub extended_query: bool,
    #[command(flatten)]
    pub options: IndicatorOptions,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub db_a: PathBuf,
    #[arg(long)]
    pub db_b: PathBuf,
    #[arg(long, default_value = "A")]
    pub label_a: String,
    #[arg(long, default_value = "B")]
    pub label_b: String,
    /// Query selecting the candidate papers in the first snapshot (default: all).
    #[arg(long)]
    pub candidates: Option<String>,
    /// Report author coverage for these researchers.
    #[arg(long = "author")]
    pub authors: Vec<String>,
    #[arg(long, value_enum, default_value = "title")]
    pub match_key: MatchKeyArg,
    #[arg(long)]
    pub extended_query: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
    #[arg(long, default_value_t = akg_service::DEFAULT_PORT, value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, default_value_t = akg_service::DEFAULT_COUNT)]
    pub default_count: usize,
    #[arg(long, default_value_t = akg_service::MAX_COUNT)]
    pub max_count: usize,
    #[arg(long)]
    pub extended_query: bool,
}
