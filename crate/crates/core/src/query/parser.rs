use chrono::NaiveDate;

use super::{AttrKind, Attribute, CmpOp, Literal, Prefix, QueryExpr, QueryOptions};
use crate::error::QueryError;

const EXPR_START: &[&str] = &["attribute", "And", "Or", "Composite"];

pub fn parse(input: &str, options: QueryOptions) -> Result<QueryExpr, QueryError> {
    let mut parser = Parser {
        src: input,
        pos: 0,
        options,
    };
    let expr = parser.expr(None)?;
    parser.skip_ws();
    if parser.pos != input.len() {
        return Err(QueryError::syntax(parser.pos, &["end of input"]));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    options: QueryOptions,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), QueryError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(QueryError::syntax(self.pos, &[&c.to_string()]))
        }
    }

    fn ident(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '.' || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 || !self.rest().starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        self.pos += len;
        Some((start, &self.src[start..start + len]))
    }

    /// `scope` is the enclosing composite prefix, if any.
    fn expr(&mut self, scope: Option<Prefix>) -> Result<QueryExpr, QueryError> {
        let Some((start, name)) = self.ident() else {
            return Err(QueryError::syntax(self.pos, EXPR_START));
        };
        self.skip_ws();
        let is_call = self.peek() == Some('(');
        match name {
            "And" | "Or" if is_call => {
                self.expect('(')?;
                let mut acc = self.expr(scope)?;
                let mut operands = 1;
                while self.eat(',') {
                    let next = self.expr(scope)?;
                    acc = if name == "And" {
                        QueryExpr::and(acc, next)
                    } else {
                        QueryExpr::or(acc, next)
                    };
                    operands += 1;
                }
                if operands < 2 {
                    return Err(QueryError::syntax(self.pos, &[","]));
                }
                self.expect(')')?;
                Ok(acc)
            }
            "Composite" if is_call => {
                if scope.is_some() {
                    return Err(QueryError::syntax(start, &["attribute", "And", "Or"]));
                }
                self.expect('(')?;
                self.skip_ws();
                let prefix = self.peek_prefix()?;
                let inner = self.expr(Some(prefix))?;
                self.expect(')')?;
                Ok(QueryExpr::composite(prefix, inner))
            }
            path => self.comparison(path, scope),
        }
    }

    /// Determine a composite's prefix from its first attribute path.
    fn peek_prefix(&mut self) -> Result<Prefix, QueryError> {
        let save = self.pos;
        let mut probe = self.pos;
        // skip nested And(/Or( openers to reach the first attribute
        loop {
            self.pos = probe;
            match self.ident() {
                Some((_, "And" | "Or")) if self.eat('(') => probe = self.pos,
                Some((_, path)) => {
                    let attr = Attribute::from_path(path)?;
                    self.pos = save;
                    return attr.prefix().ok_or_else(|| QueryError::CompositeScope {
                        path: path.to_string(),
                        prefix: "AA|F|J|C".to_string(),
                    });
                }
                None => {
                    let at = self.pos;
                    self.pos = save;
                    return Err(QueryError::syntax(at, &["attribute", "And", "Or"]));
                }
            }
        }
    }

    fn comparison(&mut self, path: &str, scope: Option<Prefix>) -> Result<QueryExpr, QueryError> {
        let attr = Attribute::from_path(path)?;
        if !attr.is_queryable(self.options.extended_query) {
            return Err(QueryError::NonQueryableAttribute(path.to_string()));
        }
        if let Some(prefix) = scope {
            if attr.prefix() != Some(prefix) {
                return Err(QueryError::CompositeScope {
                    path: path.to_string(),
                    prefix: prefix.to_string(),
                });
            }
        }

        let op = self.operator()?;
        let kind = attr.kind();
        if op != CmpOp::Eq && !matches!(kind, AttrKind::Numeric | AttrKind::Date) {
            return Err(QueryError::TypeMismatch(format!(
                "{path} supports only '=' (got '{}')",
                op.as_str()
            )));
        }

        self.skip_ws();
        if op == CmpOp::Eq && matches!(self.peek(), Some('[') | Some('(')) {
            if !matches!(kind, AttrKind::Numeric | AttrKind::Date) {
                return Err(QueryError::TypeMismatch(format!(
                    "{path} does not support ranges"
                )));
            }
            let lower_inclusive = self.peek() == Some('[');
            self.pos += 1;
            let lower = self.literal(attr)?;
            self.expect(',')?;
            let upper = self.literal(attr)?;
            self.skip_ws();
            let upper_inclusive = match self.peek() {
                Some(']') => true,
                Some(')') => false,
                _ => return Err(QueryError::syntax(self.pos, &["]", ")"])),
            };
            self.pos += 1;
            return Ok(QueryExpr::Range {
                attr,
                lower,
                upper,
                lower_inclusive,
                upper_inclusive,
            });
        }

        let value = self.literal(attr)?;
        Ok(QueryExpr::Compare { attr, op, value })
    }

    fn operator(&mut self) -> Result<CmpOp, QueryError> {
        self.skip_ws();
        let rest = self.rest();
        let (op, len) = if rest.starts_with("<=") {
            (CmpOp::Le, 2)
        } else if rest.starts_with(">=") {
            (CmpOp::Ge, 2)
        } else if rest.starts_with('<') {
            (CmpOp::Lt, 1)
        } else if rest.starts_with('>') {
            (CmpOp::Gt, 1)
        } else if rest.starts_with('=') {
            (CmpOp::Eq, 1)
        } else {
            return Err(QueryError::syntax(self.pos, &["=", "<", "<=", ">", ">="]));
        };
        self.pos += len;
        Ok(op)
    }

    fn literal(&mut self, attr: Attribute) -> Result<Literal, QueryError> {
        self.skip_ws();
        let at = self.pos;
        match self.peek() {
            Some('\'') => {
                let s = self.quoted()?;
                match attr.kind() {
                    AttrKind::Text | AttrKind::Raw => Ok(Literal::Str(s)),
                    AttrKind::Date => {
                        if s.len() == 10 && NaiveDate::parse_from_str(&s, "%Y-%m-%d").is_ok() {
                            Ok(Literal::Str(s))
                        } else {
                            Err(QueryError::TypeMismatch(format!(
                                "{attr} expects a YYYY-MM-DD date, got {s:?}"
                            )))
                        }
                    }
                    AttrKind::Numeric | AttrKind::Id => Err(QueryError::TypeMismatch(format!(
                        "{attr} expects a number, got a string"
                    ))),
                }
            }
            Some(c) if c == '-' || c.is_ascii_digit() => {
                let len = self
                    .rest()
                    .char_indices()
                    .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-')))
                    .map(|(i, _)| i)
                    .unwrap_or(self.rest().len());
                let digits = &self.rest()[..len];
                self.pos += len;
                match attr.kind() {
                    AttrKind::Numeric => digits
                        .parse::<i64>()
                        .map(Literal::Int)
                        .map_err(|_| QueryError::syntax(at, &["integer"])),
                    AttrKind::Id => match digits.parse::<u64>() {
                        Ok(0) => Err(QueryError::TypeMismatch(format!(
                            "{attr}: ids are non-zero"
                        ))),
                        Ok(v) => Ok(Literal::Id(v)),
                        Err(_) => Err(QueryError::syntax(at, &["unsigned integer"])),
                    },
                    _ => Err(QueryError::TypeMismatch(format!(
                        "{attr} expects a quoted string, got a number"
                    ))),
                }
            }
            _ => Err(QueryError::syntax(at, &["literal"])),
        }
    }

    fn quoted(&mut self) -> Result<String, QueryError> {
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\'' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('\'' | '\\'))) => out.push(e),
                    Some((j, _)) => {
                        return Err(QueryError::syntax(self.pos + j, &["\\'", "\\\\"]));
                    }
                    None => break,
                },
                c => out.push(c),
            }
        }
        Err(QueryError::syntax(self.src.len(), &["'"]))
    }
}
