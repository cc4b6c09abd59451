//! Academic graph analytics: an in-memory paper graph with Evaluate and
//! CalcHistogram style querying, journal-normalized citation indicators,
//! percentile-rank classes and cross-database metadata audits.

pub mod audit;
pub mod error;
pub mod graph;
pub mod histogram;
pub mod indicators;
pub mod ingest;
pub mod normalize;
pub mod query;

pub use error::{AuditError, GraphError, HistogramError, IndicatorError, IngestError, QueryError};
pub use graph::{AcademicGraph, CitationMode, EntityId, GraphBuilder, PaperRecord};
pub use histogram::{calc_histogram, HistogramResponse, RequestCap};
pub use normalize::{normalize_text, NormalizedText};
pub use query::{evaluate, parse, Attribute, EvaluateResponse, Query, QueryExpr, QueryOptions};
