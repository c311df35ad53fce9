//! Denial constraints: AST, line-oriented text grammar, parser and printer.
//!
//! ```text
//! # comment
//! FD Airport: Municipality -> Continent, Country
//! DC s1: t in R, s in R | t.A = s.A, t.B != s.B
//! DC h: t in Stock | t.High < t.Low
//! ```
//!
//! An `FD` line with right-hand side `B1, .., Bk` expands to `k` two-variable
//! constraints labelled `fd<n>.<Bi>`, where `n` counts FD lines from 1. Labels
//! share a *group* (the text before the first `.`), which is how violations of
//! one dependency are counted once.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::model::{Fact, Schema, Value, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_ordered(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    /// The operator obtained by swapping the operands.
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn eval(self, a: &Value, b: &Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => match self {
                    CmpOp::Lt => x < y,
                    CmpOp::Gt => x > y,
                    CmpOp::Le => x <= y,
                    CmpOp::Ge => x >= y,
                    CmpOp::Eq | CmpOp::Ne => unreachable!(),
                },
                _ => false,
            },
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    /// Attribute `name` (at position `pos`) of tuple variable number `var`.
    Attr { var: usize, pos: usize, name: String },
    Const(Value),
}

impl Term {
    pub fn eval<'a>(&'a self, assignment: &[&'a Fact]) -> &'a Value {
        match self {
            Term::Attr { var, pos, .. } => &assignment[*var].values[*pos],
            Term::Const(v) => v,
        }
    }

    pub fn var(&self) -> Option<usize> {
        match self {
            Term::Attr { var, .. } => Some(*var),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl Predicate {
    pub fn holds(&self, assignment: &[&Fact]) -> bool {
        self.op.eval(self.lhs.eval(assignment), self.rhs.eval(assignment))
    }

    /// Highest variable index mentioned, if any.
    pub fn last_var(&self) -> Option<usize> {
        match (self.lhs.var(), self.rhs.var()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleVar {
    pub name: String,
    pub relation: String,
}

/// `∀ vars ¬(p1 ∧ … ∧ pk)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenialConstraint {
    pub label: String,
    pub vars: Vec<TupleVar>,
    pub predicates: Vec<Predicate>,
}

/// An FD `X -> B` recognised inside a two-variable constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdView {
    pub relation: String,
    pub lhs: Vec<usize>,
    pub rhs: usize,
}

impl DenialConstraint {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Label prefix before the first `.`; FD expansions share it.
    pub fn group(&self) -> &str {
        self.label.split('.').next().unwrap_or(&self.label)
    }

    /// True when the assignment (one fact per variable) satisfies every predicate,
    /// i.e. witnesses a violation.
    pub fn violated_by(&self, assignment: &[&Fact]) -> bool {
        assignment
            .iter()
            .zip(&self.vars)
            .all(|(f, v)| f.relation == v.relation)
            && self.predicates.iter().all(|p| p.holds(assignment))
    }

    /// `(relation, position)` pairs mentioned by some predicate.
    pub fn attributes_used(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for p in &self.predicates {
            for t in [&p.lhs, &p.rhs] {
                if let Term::Attr { var, pos, .. } = t {
                    out.insert((self.vars[*var].relation.clone(), *pos));
                }
            }
        }
        out
    }

    pub fn as_fd(&self) -> Option<FdView> {
        if self.vars.len() != 2 || self.vars[0].relation != self.vars[1].relation {
            return None;
        }
        let mut lhs = Vec::new();
        let mut rhs = None;
        for p in &self.predicates {
            let (a, b) = match (&p.lhs, &p.rhs) {
                (Term::Attr { var: v1, pos: a, .. }, Term::Attr { var: v2, pos: b, .. }) if v1 != v2 => (*a, *b),
                _ => return None,
            };
            if a != b {
                return None;
            }
            match p.op {
                CmpOp::Eq => lhs.push(a),
                CmpOp::Ne if rhs.is_none() => rhs = Some(a),
                _ => return None,
            }
        }
        let rhs = rhs?;
        lhs.sort_unstable();
        lhs.dedup();
        if lhs.is_empty() || lhs.contains(&rhs) {
            return None;
        }
        Some(FdView {
            relation: self.vars[0].relation.clone(),
            lhs,
            rhs,
        })
    }

    /// Checks relations, attribute positions and kinds against `schema`.
    pub fn check_schema(&self, schema: &Schema) -> Result<(), String> {
        for v in &self.vars {
            if schema.relation(&v.relation).is_none() {
                return Err(format!("constraint {}: unknown relation {}", self.label, v.relation));
            }
        }
        for p in &self.predicates {
            for t in [&p.lhs, &p.rhs] {
                if let Term::Attr { var, pos, name } = t {
                    let rel = &self.vars[*var].relation;
                    let sig = schema.relation(rel).expect("checked above");
                    match sig.attributes.get(*pos) {
                        Some(a) if a.name == *name => {}
                        _ => return Err(format!("constraint {}: {rel} has no attribute {name}", self.label)),
                    }
                }
            }
        }
        Ok(())
    }
}

/// Constraints are negated conjunctions over facts, so removing facts never creates a violation.
pub fn is_anti_monotonic(_sigma: &DenialConstraint) -> bool {
    true
}

fn write_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    let plain = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_');
    if plain {
        f.write_str(name)
    } else {
        write!(f, "`{name}`")
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, vars: &[TupleVar]) -> fmt::Result {
    match t {
        Term::Attr { var, name, .. } => {
            write_ident(f, &vars[*var].name)?;
            f.write_str(".")?;
            write_ident(f, name)
        }
        Term::Const(Value::Num(x)) => write!(f, "{x}"),
        Term::Const(Value::Text(s)) => {
            f.write_str("\"")?;
            for c in s.chars() {
                match c {
                    '"' => f.write_str("\\\"")?,
                    '\\' => f.write_str("\\\\")?,
                    c => write!(f, "{c}")?,
                }
            }
            f.write_str("\"")
        }
    }
}

impl fmt::Display for DenialConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DC {}: ", self.label)?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_ident(f, &v.name)?;
            f.write_str(" in ")?;
            write_ident(f, &v.relation)?;
        }
        f.write_str(" | ")?;
        for (i, p) in self.predicates.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_term(f, &p.lhs, &self.vars)?;
            write!(f, " {} ", p.op)?;
            write_term(f, &p.rhs, &self.vars)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintSet {
    constraints: Vec<DenialConstraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<DenialConstraint>) -> Result<Self, String> {
        let mut seen = HashSet::new();
        for c in &constraints {
            if !seen.insert(c.label.as_str()) {
                return Err(format!("duplicate constraint label {}", c.label));
            }
        }
        Ok(ConstraintSet { constraints })
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DenialConstraint> {
        self.constraints.iter()
    }

    pub fn get(&self, label: &str) -> Option<&DenialConstraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// Largest number of tuple variables in one constraint (0 for the empty set).
    pub fn max_arity(&self) -> usize {
        self.constraints.iter().map(|c| c.arity()).max().unwrap_or(0)
    }

    /// The syntactic superset `self ∪ {extra}`.
    pub fn with(&self, extra: DenialConstraint) -> Result<Self, String> {
        let mut cs = self.constraints.clone();
        cs.push(extra);
        ConstraintSet::new(cs)
    }

    pub fn union(&self, other: &ConstraintSet) -> Result<Self, String> {
        let mut cs = self.constraints.clone();
        cs.extend(other.constraints.iter().cloned());
        ConstraintSet::new(cs)
    }

    /// Keeps only the constraints whose labels satisfy `keep`.
    pub fn filter(&self, keep: impl Fn(&DenialConstraint) -> bool) -> Self {
        ConstraintSet {
            constraints: self.constraints.iter().filter(|c| keep(c)).cloned().collect(),
        }
    }

    pub fn check_schema(&self, schema: &Schema) -> Result<(), String> {
        self.constraints.iter().try_for_each(|c| c.check_schema(schema))
    }

    /// Every `(relation, position)` that some constraint mentions.
    pub fn attributes_used(&self) -> BTreeSet<(String, usize)> {
        self.constraints.iter().flat_map(|c| c.attributes_used()).collect()
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a DenialConstraint;
    type IntoIter = std::slice::Iter<'a, DenialConstraint>;
    fn into_iter(self) -> Self::IntoIter {
        self.constraints.iter()
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64, String),
    Op(CmpOp),
    Comma,
    Colon,
    Pipe,
    Dot,
    Arrow,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, line_no: usize, col_offset: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |col: usize, message: String| ParseError {
        line: line_no,
        column: col + col_offset + 1,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '#' => break,
            ',' => {
                i += 1;
                Tok::Comma
            }
            ':' => {
                i += 1;
                Tok::Colon
            }
            '|' => {
                i += 1;
                Tok::Pipe
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            '→' => {
                i += 1;
                Tok::Arrow
            }
            '≠' => {
                i += 1;
                Tok::Op(CmpOp::Ne)
            }
            '≤' => {
                i += 1;
                Tok::Op(CmpOp::Le)
            }
            '≥' => {
                i += 1;
                Tok::Op(CmpOp::Ge)
            }
            '=' => {
                i += if chars.get(i + 1) == Some(&'=') { 2 } else { 1 };
                Tok::Op(CmpOp::Eq)
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                i += 2;
                Tok::Op(CmpOp::Ne)
            }
            '<' => match chars.get(i + 1) {
                Some('=') => {
                    i += 2;
                    Tok::Op(CmpOp::Le)
                }
                Some('>') => {
                    i += 2;
                    Tok::Op(CmpOp::Ne)
                }
                _ => {
                    i += 1;
                    Tok::Op(CmpOp::Lt)
                }
            },
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    i += 2;
                    Tok::Op(CmpOp::Ge)
                } else {
                    i += 1;
                    Tok::Op(CmpOp::Gt)
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                Tok::Arrow
            }
            '"' | '\'' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(start, "unterminated string".into())),
                        Some('\\') => {
                            let next = chars.get(i + 1).ok_or_else(|| err(i, "dangling escape".into()))?;
                            s.push(*next);
                            i += 2;
                        }
                        Some(&ch) if ch == quote => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(s)
            }
            '`' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&ch| ch == '`')
                    .ok_or_else(|| err(start, "unterminated quoted name".into()))?;
                let name: String = chars[i + 1..i + 1 + end].iter().collect();
                i += end + 2;
                Tok::Ident(name)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let raw: String = chars[start..i].iter().collect();
                let x: f64 = raw
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| err(start, format!("bad number `{raw}`")))?;
                Tok::Num(x, raw)
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned {
            tok,
            col: start + col_offset + 1,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Cursor<'a> {
    toks: &'a [Spanned],
    at: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.at).map_or(self.end_col, |t| t.col)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    fn err_at(&self, col: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.at).map(|t| &t.tok);
        self.at += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok((s.clone(), col))
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn done(&self) -> bool {
        self.at >= self.toks.len()
    }
}

enum RawTerm {
    Attr { var: usize, pos: usize, name: String, kind: ValueKind },
    Str(String),
    Num(f64, String),
}

/// Relation names the constraint text mentions, in order of first mention,
/// read without a schema.
pub fn mentioned_relations(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut add = |r: &str| {
        let r = r.trim();
        if !r.is_empty() && !out.iter().any(|x| x == r) {
            out.push(r.to_owned());
        }
    };
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(rest) = line.strip_prefix("FD ") {
            if let Some((rel, _)) = rest.split_once(':') {
                add(rel);
            }
        } else if let Some(rest) = line.strip_prefix("DC ") {
            let head = rest.split_once(':').map_or("", |(_, h)| h);
            let head = head.split('|').next().unwrap_or("");
            for binding in head.split(',') {
                let words: Vec<&str> = binding.split_whitespace().collect();
                if let [_, "in", rel] = words.as_slice() {
                    add(rel);
                }
            }
        }
    }
    out
}

/// Parses constraint text against `schema`.
pub fn parse_constraints(text: &str, schema: &Schema) -> Result<ConstraintSet, ParseError> {
    let mut out: Vec<DenialConstraint> = Vec::new();
    let mut labels: HashSet<String> = HashSet::new();
    let mut fd_count = 0usize;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw_line.trim_start();
        let indent = raw_line.chars().count() - trimmed.chars().count();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let keyword: String = trimmed.chars().take_while(|c| c.is_alphabetic()).collect();
        let rest_offset = indent + keyword.chars().count();
        let rest: String = trimmed.chars().skip(keyword.chars().count()).collect();
        let new = match keyword.to_ascii_uppercase().as_str() {
            "FD" => {
                fd_count += 1;
                parse_fd(&rest, rest_offset, line_no, fd_count, schema)?
            }
            "DC" => vec![parse_dc(&rest, rest_offset, line_no, schema)?],
            _ => {
                return Err(ParseError {
                    line: line_no,
                    column: indent + 1,
                    message: "expected `FD` or `DC`".into(),
                })
            }
        };
        for dc in new {
            if !labels.insert(dc.label.clone()) {
                return Err(ParseError {
                    line: line_no,
                    column: indent + 1,
                    message: format!("duplicate label `{}`", dc.label),
                });
            }
            out.push(dc);
        }
    }
    Ok(ConstraintSet { constraints: out })
}

fn parse_fd(
    rest: &str,
    offset: usize,
    line: usize,
    n: usize,
    schema: &Schema,
) -> Result<Vec<DenialConstraint>, ParseError> {
    let toks = lex(rest, line, offset)?;
    let mut cur = Cursor {
        toks: &toks,
        at: 0,
        line,
        end_col: offset + rest.chars().count() + 1,
    };
    let (rel, rel_col) = cur.ident("relation name")?;
    let sig = schema
        .relation(&rel)
        .ok_or_else(|| cur.err_at(rel_col, format!("unknown relation `{rel}`")))?;
    cur.expect(&Tok::Colon, "`:`")?;
    let attr_list = |cur: &mut Cursor<'_>| -> Result<Vec<(usize, String)>, ParseError> {
        let mut attrs = Vec::new();
        loop {
            let (a, col) = cur.ident("attribute name")?;
            let pos = sig
                .position(&a)
                .ok_or_else(|| cur.err_at(col, format!("relation `{rel}` has no attribute `{a}`")))?;
            attrs.push((pos, a));
            if cur.peek() == Some(&Tok::Comma) {
                cur.next();
            } else {
                return Ok(attrs);
            }
        }
    };
    let lhs = attr_list(&mut cur)?;
    cur.expect(&Tok::Arrow, "`->`")?;
    let rhs = attr_list(&mut cur)?;
    if !cur.done() {
        return Err(cur.err("unexpected input after FD"));
    }
    let vars = vec![
        TupleVar {
            name: "t".into(),
            relation: rel.clone(),
        },
        TupleVar {
            name: "s".into(),
            relation: rel.clone(),
        },
    ];
    let attr = |var: usize, pos: usize, name: &str| Term::Attr {
        var,
        pos,
        name: name.to_owned(),
    };
    Ok(rhs
        .iter()
        .map(|(bpos, bname)| {
            let mut predicates: Vec<Predicate> = lhs
                .iter()
                .map(|(pos, name)| Predicate {
                    lhs: attr(0, *pos, name),
                    op: CmpOp::Eq,
                    rhs: attr(1, *pos, name),
                })
                .collect();
            predicates.push(Predicate {
                lhs: attr(0, *bpos, bname),
                op: CmpOp::Ne,
                rhs: attr(1, *bpos, bname),
            });
            DenialConstraint {
                label: format!("fd{n}.{bname}"),
                vars: vars.clone(),
                predicates,
            }
        })
        .collect())
}

fn parse_dc(rest: &str, offset: usize, line: usize, schema: &Schema) -> Result<DenialConstraint, ParseError> {
    let colon = rest.find(':').ok_or_else(|| ParseError {
        line,
        column: offset + 1,
        message: "expected `<label>:`".into(),
    })?;
    let label = rest[..colon].trim().to_owned();
    let label_ok = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-'));
    if !label_ok {
        return Err(ParseError {
            line,
            column: offset + 1,
            message: format!("bad constraint label `{label}`"),
        });
    }
    let body_offset = offset + rest[..=colon].chars().count();
    let body = &rest[colon + 1..];
    let toks = lex(body, line, body_offset)?;
    let mut cur = Cursor {
        toks: &toks,
        at: 0,
        line,
        end_col: body_offset + body.chars().count() + 1,
    };

    let mut vars: Vec<TupleVar> = Vec::new();
    loop {
        let (name, col) = cur.ident("tuple variable")?;
        if vars.iter().any(|v| v.name == name) {
            return Err(cur.err_at(col, format!("variable `{name}` declared twice")));
        }
        match cur.next() {
            Some(Tok::Ident(kw)) if kw == "in" => {}
            _ => return Err(cur.err_at(col, "expected `<var> in <relation>`")),
        }
        let (rel, rel_col) = cur.ident("relation name")?;
        if schema.relation(&rel).is_none() {
            return Err(cur.err_at(rel_col, format!("unknown relation `{rel}`")));
        }
        vars.push(TupleVar { name, relation: rel });
        match cur.next() {
            Some(Tok::Comma) => continue,
            Some(Tok::Pipe) => break,
            _ => return Err(cur.err("expected `,` or `|`")),
        }
    }

    let mut predicates = Vec::new();
    loop {
        if cur.done() {
            return Err(cur.err("expected a predicate"));
        }
        let lhs_col = cur.col();
        let lhs = parse_term(&mut cur, &vars, schema)?;
        let op = match cur.next() {
            Some(Tok::Op(op)) => *op,
            _ => {
                cur.at -= 1;
                return Err(cur.err("expected a comparison operator"));
            }
        };
        let rhs = parse_term(&mut cur, &vars, schema)?;
        predicates.push(resolve_predicate(lhs, op, rhs).map_err(|m| cur.err_at(lhs_col, m))?);
        match cur.next() {
            None => break,
            Some(Tok::Comma) => continue,
            Some(_) => {
                cur.at -= 1;
                return Err(cur.err("expected `,` between predicates"));
            }
        }
    }
    Ok(DenialConstraint {
        label,
        vars,
        predicates,
    })
}

fn parse_term(cur: &mut Cursor<'_>, vars: &[TupleVar], schema: &Schema) -> Result<RawTerm, ParseError> {
    let col = cur.col();
    match cur.next() {
        Some(Tok::Str(s)) => Ok(RawTerm::Str(s.clone())),
        Some(Tok::Num(x, raw)) => Ok(RawTerm::Num(*x, raw.clone())),
        Some(Tok::Ident(v)) => {
            let var = vars
                .iter()
                .position(|tv| tv.name == *v)
                .ok_or_else(|| cur.err_at(col, format!("undeclared variable `{v}`")))?;
            cur.expect(&Tok::Dot, "`.` after tuple variable")?;
            let (attr, acol) = cur.ident("attribute name")?;
            let rel = &vars[var].relation;
            let sig = schema.relation(rel).expect("checked at declaration");
            let pos = sig
                .position(&attr)
                .ok_or_else(|| cur.err_at(acol, format!("relation `{rel}` has no attribute `{attr}`")))?;
            Ok(RawTerm::Attr {
                var,
                pos,
                name: attr,
                kind: sig.attributes[pos].kind,
            })
        }
        _ => Err(cur.err_at(col, "expected a term (`v.Attr`, string or number)")),
    }
}

fn resolve_predicate(lhs: RawTerm, op: CmpOp, rhs: RawTerm) -> Result<Predicate, String> {
    let kind_of = |t: &RawTerm| match t {
        RawTerm::Attr { kind, .. } => Some(*kind),
        _ => None,
    };
    // A constant takes the kind of the attribute it is compared with.
    let target = kind_of(&lhs).or(kind_of(&rhs));
    let finish = |t: RawTerm| -> Result<(Term, ValueKind), String> {
        Ok(match t {
            RawTerm::Attr { var, pos, name, kind } => (Term::Attr { var, pos, name }, kind),
            RawTerm::Num(x, raw) => match target {
                Some(ValueKind::Text) => (Term::Const(Value::text(raw)), ValueKind::Text),
                _ => (Term::Const(Value::num(x)), ValueKind::Numeric),
            },
            RawTerm::Str(s) => match target {
                Some(ValueKind::Numeric) => {
                    let x: f64 = s
                        .trim()
                        .parse()
                        .ok()
                        .filter(|x: &f64| x.is_finite())
                        .ok_or_else(|| format!("`{s}` is compared with a numeric attribute"))?;
                    (Term::Const(Value::num(x)), ValueKind::Numeric)
                }
                _ => (Term::Const(Value::text(s)), ValueKind::Text),
            },
        })
    };
    let (l, lk) = finish(lhs)?;
    let (r, rk) = finish(rhs)?;
    if lk != rk {
        return Err(format!("cannot compare a {lk} term with a {rk} term"));
    }
    if op.is_ordered() && lk != ValueKind::Numeric {
        return Err(format!("ordered comparison `{op}` needs numeric terms"));
    }
    Ok(Predicate { lhs: l, op, rhs: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Attribute, Signature};

    #[test]
    fn relation_names_from_constraint_text() {
        let text = "# c\nFD Airport: A -> B\nDC x: t in R, s in S | t.A = s.A\nDC y: t in R | t.A > 1\n";
        assert_eq!(mentioned_relations(text), vec!["Airport", "R", "S"]);
    }

    fn schema() -> Schema {
        let mut s = Schema::single("R", &["A", "B", "C"], ValueKind::Text);
        s.add_relation(
            "Stock",
            Signature::new(vec![
                Attribute::new("High", ValueKind::Numeric),
                Attribute::new("Low", ValueKind::Numeric),
                Attribute::new("Sym", ValueKind::Text),
            ])
            .unwrap(),
        )
        .unwrap();
        s
    }

    #[test]
    fn fd_sugar_expands_per_rhs_attribute() {
        let cs = parse_constraints("FD R: A -> B, C\n", &schema()).unwrap();
        assert_eq!(cs.len(), 2);
        let labels: Vec<_> = cs.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["fd1.B", "fd1.C"]);
        assert!(cs.iter().all(|c| c.group() == "fd1"));
        assert_eq!(cs.iter().next().unwrap().as_fd().unwrap().lhs, vec![0]);
    }

    #[test]
    fn dc_form_matches_fd_form() {
        let s = schema();
        let fd = parse_constraints("FD R: A -> B", &s).unwrap();
        let dc = parse_constraints("DC x: t in R, s in R | t.A = s.A, t.B != s.B", &s).unwrap();
        let a = fd.iter().next().unwrap();
        let b = dc.iter().next().unwrap();
        assert_eq!(a.vars, b.vars);
        assert_eq!(a.predicates, b.predicates);
    }

    #[test]
    fn single_variable_ordered_dc() {
        let cs = parse_constraints("DC h: t in Stock | t.High < t.Low", &schema()).unwrap();
        let dc = cs.iter().next().unwrap();
        assert_eq!(dc.arity(), 1);
        assert_eq!(dc.predicates[0].op, CmpOp::Lt);
        assert!(is_anti_monotonic(dc));
    }

    #[test]
    fn errors_carry_positions() {
        let s = schema();
        let e = parse_constraints("\nDC x: t in R | t.A < t.B", &s).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("numeric"));
        let e = parse_constraints("DC x: t in R | u.A = t.A", &s).unwrap_err();
        assert_eq!(e.column, 16);
        let e = parse_constraints("DC x: t in Q | t.A = t.A", &s).unwrap_err();
        assert!(e.message.contains("unknown relation"));
        let e = parse_constraints("DC x: t in R | t.Z = t.A", &s).unwrap_err();
        assert!(e.message.contains("no attribute"));
        let e = parse_constraints("DC x: t in R |", &s).unwrap_err();
        assert!(e.message.contains("predicate"));
        assert!(parse_constraints("FD R: A -> B\nDC fd1.B: t in R | t.A = \"x\"", &s).is_err());
    }

    #[test]
    fn comments_and_constants() {
        let s = schema();
        let cs = parse_constraints(
            "# header\n  DC c1: t in R | t.A = 5 # trailing\nDC c2: t in Stock | t.Sym = \"a,b\", t.Low <= -2.5",
            &s,
        )
        .unwrap();
        let c1 = cs.get("c1").unwrap();
        assert_eq!(c1.predicates[0].rhs, Term::Const(Value::text("5")));
        let c2 = cs.get("c2").unwrap();
        assert_eq!(c2.predicates[1].rhs, Term::Const(Value::num(-2.5)));
    }

    #[test]
    fn printing_round_trips() {
        let s = schema();
        let text = "FD R: A, B -> C\nDC q: t in R, s in Stock | t.A = s.Sym, s.High >= 3, t.C <> \"q\\\"x\"\n";
        let cs = parse_constraints(text, &s).unwrap();
        let again = parse_constraints(&cs.to_string(), &s).unwrap();
        assert_eq!(cs, again);
    }
}
