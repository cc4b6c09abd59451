//! Attribute registry: the queryable entity attributes and the response-only
//! extended attributes.

use std::fmt;
use std::str::FromStr;

use crate::error::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    // paper
    Title,
    Id,
    Year,
    Date,
    CitationCount,
    EstimatedCitationCount,
    ReferenceId,
    Word,
    // author (embedded in AA)
    AuthorName,
    AuthorId,
    AffiliationName,
    AffiliationId,
    // field of study
    FieldName,
    FieldId,
    // journal
    JournalName,
    JournalId,
    // venue (conference series)
    VenueName,
    VenueId,
    // extended, response-only
    Volume,
    Issue,
    FirstPage,
    LastPage,
    Doi,
    DisplayName,
    Description,
    Sources,
    SourceFormat,
    SourceUrl,
    VenueDisplayName,
    VenueShortName,
}

/// Value type of an attribute in query position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    /// Compared on normalized form, equality only.
    Text,
    /// Signed integer; all comparison operators and ranges.
    Numeric,
    /// Entity id; equality only.
    Id,
    /// ISO-8601 date; all comparison operators and ranges.
    Date,
    /// Raw string compared case-insensitively (DOI).
    Raw,
}

/// Embedded-entity prefix used by `Composite(...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prefix {
    AA,
    F,
    J,
    C,
}

impl Prefix {
    pub fn as_str(self) -> &'static str {
        match self {
            Prefix::AA => "AA",
            Prefix::F => "F",
            Prefix::J => "J",
            Prefix::C => "C",
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const ENTITY_ATTRIBUTES: [Attribute; 18] = [
    Attribute::Title,
    Attribute::Id,
    Attribute::Year,
    Attribute::Date,
    Attribute::CitationCount,
    Attribute::EstimatedCitationCount,
    Attribute::ReferenceId,
    Attribute::Word,
    Attribute::AuthorName,
    Attribute::AuthorId,
    Attribute::AffiliationName,
    Attribute::AffiliationId,
    Attribute::FieldName,
    Attribute::FieldId,
    Attribute::JournalName,
    Attribute::JournalId,
    Attribute::VenueName,
    Attribute::VenueId,
];

pub const EXTENDED_ATTRIBUTES: [Attribute; 12] = [
    Attribute::Volume,
    Attribute::Issue,
    Attribute::FirstPage,
    Attribute::LastPage,
    Attribute::Doi,
    Attribute::DisplayName,
    Attribute::Description,
    Attribute::Sources,
    Attribute::SourceFormat,
    Attribute::SourceUrl,
    Attribute::VenueDisplayName,
    Attribute::VenueShortName,
];

impl Attribute {
    pub fn path(self) -> &'static str {
        use Attribute::*;
        match self {
            Title => "Ti",
            Id => "Id",
            Year => "Y",
            Date => "D",
            CitationCount => "CC",
            EstimatedCitationCount => "ECC",
            ReferenceId => "RId",
            Word => "W",
            AuthorName => "AA.AuN",
            AuthorId => "AA.AuId",
            AffiliationName => "AA.AfN",
            AffiliationId => "AA.AfId",
            FieldName => "F.FN",
            FieldId => "F.FId",
            JournalName => "J.JN",
            JournalId => "J.JId",
            VenueName => "C.CN",
            VenueId => "C.CId",
            Volume => "E.V",
            Issue => "E.I",
            FirstPage => "E.FP",
            LastPage => "E.LP",
            Doi => "E.DOI",
            DisplayName => "E.DN",
            Description => "E.D",
            Sources => "E.S",
            SourceFormat => "E.S.Ty",
            SourceUrl => "E.S.U",
            VenueDisplayName => "E.VFN",
            VenueShortName => "E.VSN",
        }
    }

    /// Last path segment, used as the JSON key inside nested objects.
    pub fn leaf(self) -> &'static str {
        let path = self.path();
        match self.prefix() {
            Some(p) => &path[p.as_str().len() + 1..],
            None if self.is_extended() => &path[2..],
            None => path,
        }
    }

    pub fn kind(self) -> AttrKind {
        use Attribute::*;
        match self {
            Title | Word | AuthorName | AffiliationName | FieldName | JournalName | VenueName => {
                AttrKind::Text
            }
            Year | CitationCount | EstimatedCitationCount => AttrKind::Numeric,
            Id | ReferenceId | AuthorId | AffiliationId | FieldId | JournalId | VenueId => {
                AttrKind::Id
            }
            Date => AttrKind::Date,
            _ => AttrKind::Raw,
        }
    }

    pub fn prefix(self) -> Option<Prefix> {
        use Attribute::*;
        match self {
            AuthorName | AuthorId | AffiliationName | AffiliationId => Some(Prefix::AA),
            FieldName | FieldId => Some(Prefix::F),
            JournalName | JournalId => Some(Prefix::J),
            VenueName | VenueId => Some(Prefix::C),
            _ => None,
        }
    }

    pub fn is_extended(self) -> bool {
        EXTENDED_ATTRIBUTES.contains(&self)
    }

    /// Whether the attribute may appear in a query expression.
    pub fn is_queryable(self, extended_query: bool) -> bool {
        !self.is_extended() || (extended_query && self == Attribute::Doi)
    }

    pub fn is_histogrammable(self) -> bool {
        !self.is_extended()
    }

    /// Resolve a path such as `AA.AuN`. Paths are case-sensitive.
    pub fn from_path(path: &str) -> Result<Self, QueryError> {
        ENTITY_ATTRIBUTES
            .iter()
            .chain(EXTENDED_ATTRIBUTES.iter())
            .copied()
            .find(|a| a.path() == path)
            .ok_or_else(|| QueryError::UnknownAttribute(path.to_string()))
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.path())
    }
}

impl FromStr for Attribute {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::from_path(s)
    }
}

/// Parse a comma-separated attribute list such as `Id,Ti,AA.AuN`.
pub fn parse_attribute_list(list: &str) -> Result<Vec<Attribute>, QueryError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Attribute::from_path)
        .collect()
}
