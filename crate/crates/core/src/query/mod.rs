//! Query-expression language shared by Evaluate and CalcHistogram.
//!
//! ```text
//! expr      := And(expr, expr, ...) | Or(expr, expr, ...) | Composite(expr) | compare
//! compare   := path op literal | path '=' range
//! op        := '=' | '<' | '<=' | '>' | '>='
//! literal   := integer | 'quoted string'
//! range     := ('[' | '(') literal ',' literal (']' | ')')
//! ```
//!
//! `And`/`Or` with more than two operands fold to the left.

mod attr;
mod eval;
mod parser;

use std::fmt;

pub use attr::{
    parse_attribute_list, AttrKind, Attribute, Prefix, ENTITY_ATTRIBUTES, EXTENDED_ATTRIBUTES,
};
pub use eval::{
    attribute_values, evaluate, matches, matching_papers, select_attributes, AttrValue,
    EvaluateResponse, EvaluatedEntity,
};
pub use parser::parse;

use crate::error::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<T: Ord + ?Sized>(self, left: &T, right: &T) -> bool {
        match self {
            CmpOp::Eq => left == right,
            CmpOp::Lt => left < right,
            CmpOp::Le => left <= right,
            CmpOp::Gt => left > right,
            CmpOp::Ge => left >= right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Id(u64),
    /// Raw string as written; text attributes normalize it at match time.
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Id(v) => write!(f, "{v}"),
            Literal::Str(s) => {
                f.write_str("'")?;
                for c in s.chars() {
                    if c == '\'' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("'")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Compare {
        attr: Attribute,
        op: CmpOp,
        value: Literal,
    },
    Range {
        attr: Attribute,
        lower: Literal,
        upper: Literal,
        lower_inclusive: bool,
        upper_inclusive: bool,
    },
    Composite {
        prefix: Prefix,
        expr: Box<QueryExpr>,
    },
    And(Box<QueryExpr>, Box<QueryExpr>),
    Or(Box<QueryExpr>, Box<QueryExpr>),
}

impl QueryExpr {
    pub fn compare(attr: Attribute, op: CmpOp, value: Literal) -> Self {
        QueryExpr::Compare { attr, op, value }
    }

    pub fn closed_range(attr: Attribute, lower: Literal, upper: Literal) -> Self {
        QueryExpr::Range {
            attr,
            lower,
            upper,
            lower_inclusive: true,
            upper_inclusive: true,
        }
    }

    pub fn and(left: QueryExpr, right: QueryExpr) -> Self {
        QueryExpr::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: QueryExpr, right: QueryExpr) -> Self {
        QueryExpr::Or(Box::new(left), Box::new(right))
    }

    pub fn composite(prefix: Prefix, expr: QueryExpr) -> Self {
        QueryExpr::Composite {
            prefix,
            expr: Box::new(expr),
        }
    }

    /// `And(J.JId=<journal>, Y=[first,last])`.
    pub fn journal_years(journal: u64, first: i32, last: i32) -> Self {
        QueryExpr::and(
            QueryExpr::compare(Attribute::JournalId, CmpOp::Eq, Literal::Id(journal)),
            QueryExpr::closed_range(
                Attribute::Year,
                Literal::Int(first.into()),
                Literal::Int(last.into()),
            ),
        )
    }
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryExpr::Compare { attr, op, value } => write!(f, "{attr}{}{value}", op.as_str()),
            QueryExpr::Range {
                attr,
                lower,
                upper,
                lower_inclusive,
                upper_inclusive,
            } => write!(
                f,
                "{attr}={}{lower},{upper}{}",
                if *lower_inclusive { '[' } else { '(' },
                if *upper_inclusive { ']' } else { ')' }
            ),
            QueryExpr::Composite { expr, .. } => write!(f, "Composite({expr})"),
            QueryExpr::And(l, r) => write!(f, "And({l},{r})"),
            QueryExpr::Or(l, r) => write!(f, "Or({l},{r})"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryOptions {
    /// Allow `E.DOI` in query position.
    pub extended_query: bool,
}

/// A parsed expression together with the text it was parsed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub text: String,
    pub expr: QueryExpr,
}

impl Query {
    pub fn parse(text: &str, options: QueryOptions) -> Result<Self, QueryError> {
        Ok(Query {
            text: text.to_string(),
            expr: parse(text, options)?,
        })
    }
}

impl From<QueryExpr> for Query {
    fn from(expr: QueryExpr) -> Self {
        Query {
            text: expr.to_string(),
            expr,
        }
    }
}
