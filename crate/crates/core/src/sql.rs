//! Parser and canonical renderer for the supported SQL subset:
//!
//! ```text
//! SELECT * FROM t [[INNER] JOIN t2 ON t.c = t2.c] [WHERE pred (AND pred)*] [;]
//! pred := colref op (literal | colref)      op := = | < | <= | > | >=
//! ```
//!
//! Keywords and identifiers are case-insensitive; identifiers are stored in
//! upper case. Text literals keep their case.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub table: Option<String>,
    pub column: String,
}

impl ColumnRef {
    pub fn new(column: &str) -> Self {
        ColumnRef {
            table: None,
            column: column.to_ascii_uppercase(),
        }
    }

    pub fn qualified(table: &str, column: &str) -> Self {
        ColumnRef {
            table: Some(table.to_ascii_uppercase()),
            column: column.to_ascii_uppercase(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.table {
            Some(t) => write!(f, "{t}.{}", self.column),
            None => f.write_str(&self.column),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn is_range(self) -> bool {
        self != CompareOp::Eq
    }

    pub fn eval<T: Ord + ?Sized>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            CompareOp::Eq => lhs == rhs,
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Literal(Value),
    Column(ColumnRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    pub lhs: ColumnRef,
    pub op: CompareOp,
    pub rhs: Operand,
}

impl Predicate {
    /// A predicate is sargable when it compares a column with a literal.
    pub fn sargable(&self) -> bool {
        matches!(self.rhs, Operand::Literal(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JoinSpec {
    pub right_table: String,
    pub left_col: ColumnRef,
    pub right_col: ColumnRef,
}

/// A parsed `SELECT *` query. The select list is always `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryAst {
    pub base_table: String,
    pub join: Option<JoinSpec>,
    pub where_clause: Vec<Predicate>,
}

impl QueryAst {
    /// Base table followed by the join table, if any.
    pub fn tables(&self) -> Vec<String> {
        let mut v = vec![self.base_table.clone()];
        if let Some(j) = &self.join {
            v.push(j.right_table.clone());
        }
        v
    }

    /// Every column reference in the join condition and WHERE clause, in
    /// source order, duplicates included.
    pub fn predicate_columns(&self) -> Vec<&ColumnRef> {
        let mut out = Vec::new();
        if let Some(j) = &self.join {
            out.push(&j.left_col);
            out.push(&j.right_col);
        }
        for p in &self.where_clause {
            out.push(&p.lhs);
            if let Operand::Column(c) = &p.rhs {
                out.push(c);
            }
        }
        out
    }

    /// Number of distinct column references in the join and WHERE clauses.
    pub fn referenced_column_count(&self) -> usize {
        self.predicate_columns()
            .into_iter()
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Int(i) => write!(f, "{i}"),
        Value::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.lhs, self.op.symbol())?;
        match &self.rhs {
            Operand::Literal(v) => write_literal(f, v),
            Operand::Column(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT * FROM {}", self.base_table)?;
        if let Some(j) = &self.join {
            write!(
                f,
                " INNER JOIN {} ON {} = {}",
                j.right_table, j.left_col, j.right_col
            )?;
        }
        for (i, p) in self.where_clause.iter().enumerate() {
            f.write_str(if i == 0 { " WHERE " } else { " AND " })?;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

pub fn parse(text: &str) -> Result<QueryAst> {
    let tokens = lex(text)?;
    Parser {
        tokens,
        pos: 0,
        end: text.len(),
    }
    .query()
}

/// Canonical form: upper-case keywords and identifiers, single spaces,
/// predicates in source order.
pub fn render(q: &QueryAst) -> String {
    q.render()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Star,
    Comma,
    Dot,
    Semi,
    LParen,
    RParen,
    Op(CompareOp),
    NotEq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_ascii_uppercase())
            }
            b'0'..=b'9' | b'-' => {
                if b == b'-' {
                    i += 1;
                    if !bytes.get(i).is_some_and(u8::is_ascii_digit) {
                        return Err(syntax(start, "expected digits after `-`"));
                    }
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v = text[start..i]
                    .parse()
                    .map_err(|_| syntax(start, "integer literal out of range"))?;
                Tok::Int(v)
            }
            b'\'' => {
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(rel) = text[i..].find('\'') else {
                        return Err(syntax(start, "unterminated string literal"));
                    };
                    s.push_str(&text[i..i + rel]);
                    i += rel + 1;
                    if bytes.get(i) == Some(&b'\'') {
                        s.push('\'');
                        i += 1;
                    } else {
                        break;
                    }
                }
                Tok::Str(s)
            }
            b'*' => {
                i += 1;
                Tok::Star
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b';' => {
                i += 1;
                Tok::Semi
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'=' => {
                i += 1;
                Tok::Op(CompareOp::Eq)
            }
            b'<' | b'>' | b'!' => {
                i += 1;
                let next = bytes.get(i).copied();
                let (tok, len) = match (b, next) {
                    (b'<', Some(b'=')) => (Tok::Op(CompareOp::Le), 1),
                    (b'<', Some(b'>')) | (b'!', Some(b'=')) => (Tok::NotEq, 1),
                    (b'<', _) => (Tok::Op(CompareOp::Lt), 0),
                    (b'>', Some(b'=')) => (Tok::Op(CompareOp::Ge), 1),
                    (b'>', _) => (Tok::Op(CompareOp::Gt), 0),
                    _ => return Err(syntax(start, "unexpected `!`")),
                };
                i += len;
                tok
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "OR", "NOT", "ORDER", "GROUP", "BY", "HAVING", "LIMIT", "OFFSET", "UNION", "IN", "LIKE",
    "BETWEEN", "LEFT", "RIGHT", "FULL", "OUTER", "CROSS", "DISTINCT", "IS", "NULL", "AS", "EXISTS",
];

const RESERVED: &[&str] = &["SELECT", "FROM", "WHERE", "AND", "INNER", "JOIN", "ON"];

fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word) || UNSUPPORTED_KEYWORDS.contains(&word)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == kw)
    }

    /// Error for the current token: constructs known to lie outside the
    /// grammar are reported as unsupported, anything else as a syntax error.
    fn unexpected(&self, expected: &str) -> Error {
        match self.peek() {
            Some(Tok::Ident(w)) if UNSUPPORTED_KEYWORDS.contains(&w.as_str()) => {
                Error::Unsupported(format!("`{w}` is not supported"))
            }
            Some(Tok::LParen) => {
                Error::Unsupported("parenthesised expressions and subqueries".into())
            }
            Some(Tok::NotEq) => Error::Unsupported("`<>` comparisons".into()),
            Some(Tok::Comma) => Error::Unsupported("multiple tables in FROM".into()),
            Some(t) => syntax(self.offset(), format!("expected {expected}, found {t:?}")),
            None => syntax(
                self.offset(),
                format!("expected {expected}, found end of input"),
            ),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if self.at_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(w)) if !is_reserved(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn column_ref(&mut self) -> Result<ColumnRef> {
        let first = self.ident("column name")?;
        if self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let col = self.ident("column name")?;
            Ok(ColumnRef {
                table: Some(first),
                column: col,
            })
        } else {
            Ok(ColumnRef {
                table: None,
                column: first,
            })
        }
    }

    fn compare_op(&mut self) -> Result<CompareOp> {
        match self.peek() {
            Some(Tok::Op(op)) => {
                let op = *op;
                self.pos += 1;
                Ok(op)
            }
            _ => Err(self.unexpected("comparison operator")),
        }
    }

    fn predicate(&mut self) -> Result<Predicate> {
        let lhs = match self.peek() {
            Some(Tok::Int(_) | Tok::Str(_)) => {
                return Err(syntax(self.offset(), "predicate must start with a column"))
            }
            _ => self.column_ref()?,
        };
        let op = self.compare_op()?;
        let rhs = match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Operand::Literal(Value::Int(v))
            }
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Operand::Literal(Value::text(&s))
            }
            Some(Tok::Ident(_)) => Operand::Column(self.column_ref()?),
            _ => return Err(self.unexpected("literal or column")),
        };
        Ok(Predicate { lhs, op, rhs })
    }

    fn query(mut self) -> Result<QueryAst> {
        self.keyword("SELECT")?;
        match self.peek() {
            Some(Tok::Star) => self.pos += 1,
            Some(Tok::Ident(w)) if w == "DISTINCT" => {
                return Err(Error::Unsupported("`DISTINCT` is not supported".into()))
            }
            Some(Tok::Ident(_) | Tok::Int(_) | Tok::Str(_)) => {
                return Err(Error::Unsupported("select list other than `*`".into()))
            }
            _ => return Err(self.unexpected("`*`")),
        }
        self.keyword("FROM")?;
        let base_table = self.ident("table name")?;

        let mut join = None;
        if self.at_keyword("INNER") || self.at_keyword("JOIN") {
            if self.at_keyword("INNER") {
                self.pos += 1;
            }
            self.keyword("JOIN")?;
            let right_table = self.ident("table name")?;
            self.keyword("ON")?;
            let left_col = self.column_ref()?;
            match self.peek() {
                Some(Tok::Op(CompareOp::Eq)) => self.pos += 1,
                Some(Tok::Op(_)) | Some(Tok::NotEq) => {
                    return Err(Error::Unsupported("non-equality join condition".into()))
                }
                _ => return Err(self.unexpected("`=`")),
            }
            let right_col = self.column_ref()?;
            if self.at_keyword("AND") || self.at_keyword("OR") {
                return Err(Error::Unsupported(
                    "join conditions with more than one comparison".into(),
                ));
            }
            join = Some(JoinSpec {
                right_table,
                left_col,
                right_col,
            });
        }

        let mut where_clause = Vec::new();
        if self.at_keyword("WHERE") {
            self.pos += 1;
            where_clause.push(self.predicate()?);
            while self.at_keyword("AND") {
                self.pos += 1;
                where_clause.push(self.predicate()?);
            }
        }
        if self.peek() == Some(&Tok::Semi) {
            self.pos += 1;
        }
        if self.pos < self.tokens.len() {
            return Err(self.unexpected("end of query"));
        }
        Ok(QueryAst {
            base_table,
            join,
            where_clause,
        })
    }
}
