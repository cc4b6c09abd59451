use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("entity {0} not found")]
    NotFound(u64),
    #[error("duplicate id {0}")]
    DuplicateId(u64),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at position {position}: expected one of {}", expected.join(", "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
    },
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("attribute {0} cannot be used in a query expression")]
    NonQueryableAttribute(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("attribute {path} is not under composite prefix {prefix}")]
    CompositeScope { path: String, prefix: String },
    #[error("attribute {0} cannot be histogrammed")]
    NotHistogrammable(String),
}

impl QueryError {
    pub fn syntax(position: usize, expected: &[&str]) -> Self {
        QueryError::Syntax {
            position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Stable code used in wire-level error envelopes.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Syntax { .. } => "SyntaxError",
            QueryError::UnknownAttribute(_) => "UnknownAttribute",
            QueryError::NonQueryableAttribute(_) => "NonQueryableAttribute",
            QueryError::TypeMismatch(_) => "TypeMismatch",
            QueryError::CompositeScope { .. } => "TypeMismatch",
            QueryError::NotHistogrammable(_) => "UnknownAttribute",
        }
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            QueryError::Syntax { position, .. } => Some(*position),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistogramError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("{num_entities} matching entities exceed the request cap of {cap}")]
    CapExceeded { num_entities: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndicatorError {
    #[error("unknown journal {0}")]
    UnknownJournal(String),
    #[error("reference set for journal {journal} over {first}-{last} is empty")]
    EmptyReferenceSet { journal: u64, first: i32, last: i32 },
    #[error("invalid year range {first}-{last}")]
    InvalidYears { first: i32, last: i32 },
    #[error("reference cell for year {0} is empty")]
    EmptyCell(i32),
    #[error("citation distribution is empty")]
    EmptyDistribution,
    #[error("no publications left after exclusions")]
    AllExcluded,
    #[error("no publications to score")]
    NoPublications,
    #[error("invalid percentile scheme: {0}")]
    InvalidScheme(String),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("no matched publication pairs")]
    EmptyPairs,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing required file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("malformed row in {file} at line {line}: {reason}")]
    MalformedRow {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("duplicate id {id} in {file}")]
    DuplicateId { file: String, id: u64 },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON fixture {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
