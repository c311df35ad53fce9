//! Repair operations, cost models and repair scripts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::model::{Database, Fact, RecordId, Schema, Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum RepairOp {
    Delete { id: RecordId },
    Insert { fact: Fact },
    Update { id: RecordId, attribute: String, value: Value },
}

impl RepairOp {
    pub fn delete(id: u64) -> Self {
        RepairOp::Delete { id: RecordId(id) }
    }

    pub fn update(id: u64, attribute: impl Into<String>, value: impl Into<Value>) -> Self {
        RepairOp::Update {
            id: RecordId(id),
            attribute: attribute.into(),
            value: value.into(),
        }
    }
}

/// Prints a value so that the script parser reads it back unchanged.
pub fn quote_value(v: &Value) -> String {
    match v {
        Value::Num(x) => format!("{x}"),
        Value::Text(s) => {
            let mut out = String::with_capacity(s.len() + 2);
            out.push('"');
            for c in s.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('"');
            out
        }
    }
}

fn quote_name(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_') {
        s.to_owned()
    } else {
        quote_value(&Value::Text(s.to_owned()))
    }
}

impl fmt::Display for RepairOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairOp::Delete { id } => write!(f, "delete {id}"),
            RepairOp::Update { id, attribute, value } => {
                write!(f, "update {id} {} {}", quote_name(attribute), quote_value(value))
            }
            RepairOp::Insert { fact } => {
                write!(f, "insert {}", quote_name(&fact.relation))?;
                for (i, v) in fact.values.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { ", " })?;
                    f.write_str(&quote_value(v))?;
                }
                Ok(())
            }
        }
    }
}

/// Operation costs. Deletions use the per-row cost column unless disabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub use_cost_column: bool,
    pub insertion: f64,
    pub update: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            use_cost_column: true,
            insertion: 1.0,
            update: 1.0,
        }
    }
}

impl CostModel {
    pub fn unit() -> Self {
        CostModel {
            use_cost_column: false,
            ..CostModel::default()
        }
    }

    pub fn deletion(&self, db: &Database, id: RecordId) -> f64 {
        if self.use_cost_column {
            db.cost_of(id)
        } else {
            1.0
        }
    }

    /// Cost of applying `op` to `db`; zero exactly when the op leaves `db` unchanged.
    pub fn cost(&self, op: &RepairOp, db: &Database) -> f64 {
        if !changes(db, op) {
            return 0.0;
        }
        match op {
            RepairOp::Delete { id } => self.deletion(db, *id),
            RepairOp::Insert { .. } => self.insertion,
            RepairOp::Update { .. } => self.update,
        }
    }
}

fn update_target(db: &Database, id: RecordId, attribute: &str, value: &Value) -> Option<usize> {
    let fact = db.get(id)?;
    let sig = db.schema().relation(&fact.relation)?;
    let pos = sig.position(attribute)?;
    (sig.attributes[pos].kind == value.kind()).then_some(pos)
}

/// Whether `op` is applicable and actually changes `db`.
pub fn changes(db: &Database, op: &RepairOp) -> bool {
    match op {
        RepairOp::Delete { id } => db.contains(*id),
        RepairOp::Insert { fact } => db.check_fact(fact).is_ok(),
        RepairOp::Update { id, attribute, value } => match update_target(db, *id, attribute, value) {
            Some(pos) => db.get(*id).is_some_and(|f| &f.values[pos] != value),
            None => false,
        },
    }
}

/// Applies `op` in place; inapplicable operations leave `db` untouched.
/// Returns whether anything changed.
pub fn apply_in_place(db: &mut Database, op: &RepairOp) -> bool {
    if !changes(db, op) {
        return false;
    }
    match op {
        RepairOp::Delete { id } => {
            db.remove(*id);
        }
        RepairOp::Insert { fact } => {
            db.push(fact.clone()).expect("checked by changes");
        }
        RepairOp::Update { id, attribute, value } => {
            let pos = update_target(db, *id, attribute, value).expect("checked by changes");
            db.set_value(*id, pos, value.clone()).expect("checked by changes");
        }
    }
    true
}

pub fn apply_op(db: &Database, op: &RepairOp) -> Database {
    let mut out = db.clone();
    apply_in_place(&mut out, op);
    out
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RepairScript {
    pub ops: Vec<RepairOp>,
}

impl RepairScript {
    pub fn new(ops: Vec<RepairOp>) -> Self {
        RepairScript { ops }
    }

    pub fn apply(&self, db: &Database) -> Database {
        let mut out = db.clone();
        for op in &self.ops {
            apply_in_place(&mut out, op);
        }
        out
    }

    /// Parses one operation per line: `delete <id>`, `update <id> <attr> <value>`,
    /// `insert <relation> <v1>, <v2>, ...`. Unquoted values take the attribute's kind.
    pub fn parse(text: &str, schema: &Schema) -> Result<Self, ParseError> {
        let mut ops = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let toks = split_line(line, i + 1)?;
            if toks.is_empty() {
                continue;
            }
            ops.push(parse_op(&toks, schema, i + 1)?);
        }
        Ok(RepairScript { ops })
    }
}

impl fmt::Display for RepairScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

/// Sum of per-operation costs, each evaluated on the state it is applied to.
pub fn script_cost(script: &RepairScript, db: &Database, costs: &CostModel) -> f64 {
    let mut cur = db.clone();
    let mut total = 0.0;
    for op in &script.ops {
        total += costs.cost(op, &cur);
        apply_in_place(&mut cur, op);
    }
    total
}

struct Tok {
    text: String,
    quoted: bool,
    col: usize,
}

fn split_line(line: &str, line_no: usize) -> Result<Vec<Tok>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() || c == ',' {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let col = i + 1;
        if c == '"' || c == '\'' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(ParseError {
                            line: line_no,
                            column: col,
                            message: "unterminated string".into(),
                        })
                    }
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) if ch == c => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Tok { text: s, quoted: true, col });
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != ',' && chars[i] != '#' {
                i += 1;
            }
            out.push(Tok {
                text: chars[start..i].iter().collect(),
                quoted: false,
                col,
            });
        }
    }
    Ok(out)
}

fn value_for(tok: &Tok, kind: ValueKind, line: usize) -> Result<Value, ParseError> {
    match kind {
        ValueKind::Text => Ok(Value::Text(tok.text.clone())),
        ValueKind::Numeric => tok
            .text
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::num)
            .ok_or_else(|| ParseError {
                line,
                column: tok.col,
                message: format!("`{}` is not a number", tok.text),
            }),
    }
}

fn parse_op(toks: &[Tok], schema: &Schema, line: usize) -> Result<RepairOp, ParseError> {
    let err = |col: usize, message: String| ParseError { line, column: col, message };
    let id_of = |t: &Tok| {
        t.text
            .parse::<u64>()
            .map(RecordId)
            .map_err(|_| err(t.col, format!("`{}` is not a record id", t.text)))
    };
    let kw = &toks[0];
    match kw.text.to_ascii_lowercase().as_str() {
        "delete" | "del" => {
            if toks.len() != 2 {
                return Err(err(kw.col, "expected `delete <id>`".into()));
            }
            Ok(RepairOp::Delete { id: id_of(&toks[1])? })
        }
        "update" | "upd" => {
            if toks.len() != 4 {
                return Err(err(kw.col, "expected `update <id> <attribute> <value>`".into()));
            }
            let id = id_of(&toks[1])?;
            let attr = &toks[2].text;
            let kinds: Vec<ValueKind> = schema
                .relations()
                .filter_map(|(_, sig)| sig.position(attr).map(|p| sig.attributes[p].kind))
                .collect();
            let kind = match kinds.first() {
                None => return Err(err(toks[2].col, format!("unknown attribute `{attr}`"))),
                Some(k) if kinds.iter().all(|x| x == k) => *k,
                Some(_) if toks[3].quoted => ValueKind::Text,
                Some(_) => ValueKind::Numeric,
            };
            Ok(RepairOp::Update {
                id,
                attribute: attr.clone(),
                value: value_for(&toks[3], kind, line)?,
            })
        }
        "insert" | "ins" => {
            let rel = toks.get(1).ok_or_else(|| err(kw.col, "expected a relation name".into()))?;
            let sig = schema
                .relation(&rel.text)
                .ok_or_else(|| err(rel.col, format!("unknown relation `{}`", rel.text)))?;
            let vals = &toks[2..];
            if vals.len() != sig.arity() {
                return Err(err(
                    rel.col,
                    format!("`{}` takes {} values, got {}", rel.text, sig.arity(), vals.len()),
                ));
            }
            let values = vals
                .iter()
                .zip(&sig.attributes)
                .map(|(t, a)| value_for(t, a.kind, line))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RepairOp::Insert {
                fact: Fact::new(rel.text.clone(), values),
            })
        }
        other => Err(err(kw.col, format!("unknown operation `{other}`"))),
    }
}
