//! Relational schema, facts and databases keyed by record identifiers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Kind of values an attribute holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Text,
    Numeric,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Text => f.write_str("text"),
            ValueKind::Numeric => f.write_str("num"),
        }
    }
}

/// A cell value. Numeric values are never NaN.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Text(String),
}

impl Value {
    pub fn num(x: f64) -> Self {
        debug_assert!(!x.is_nan());
        // -0.0 and 0.0 must hash alike
        Value::Num(if x == 0.0 { 0.0 } else { x })
    }

    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Num(_) => ValueKind::Numeric,
            Value::Text(_) => ValueKind::Text,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            Value::Text(_) => None,
        }
    }

    /// Total order used for deterministic sorting: numbers before text.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Num(a), Value::Num(b)) => (a + 0.0).total_cmp(&(b + 0.0)),
            (Value::Num(_), Value::Text(_)) => Ordering::Less,
            (Value::Text(_), Value::Num(_)) => Ordering::Greater,
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Num(a), Value::Num(b)) => a == b,
            (Value::Text(a), Value::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Num(x) => {
                0u8.hash(state);
                let x = if *x == 0.0 { 0.0 } else { *x };
                x.to_bits().hash(state);
            }
            Value::Text(s) => {
                1u8.hash(state);
                s.hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::text(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::num(x)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::num(x as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: ValueKind,
}

impl Attribute {
    pub fn new(name: impl Into<String>, kind: ValueKind) -> Self {
        Attribute {
            name: name.into(),
            kind,
        }
    }
}

/// Ordered list of distinct attributes of one relation.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Signature {
    pub attributes: Vec<Attribute>,
}

impl Signature {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(ModelError::DuplicateAttribute(a.name.clone()));
            }
        }
        Ok(Signature { attributes })
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schema {
    relations: BTreeMap<String, Signature>,
}

impl Schema {
    pub fn new() -> Self {
        Schema::default()
    }

    pub fn with_relation(mut self, name: impl Into<String>, sig: Signature) -> Result<Self, ModelError> {
        self.add_relation(name, sig)?;
        Ok(self)
    }

    pub fn add_relation(&mut self, name: impl Into<String>, sig: Signature) -> Result<(), ModelError> {
        let name = name.into();
        if self.relations.contains_key(&name) {
            return Err(ModelError::DuplicateRelation(name));
        }
        self.relations.insert(name, sig);
        Ok(())
    }

    /// Convenience constructor for a single relation whose attributes share one kind.
    pub fn single(name: &str, attrs: &[&str], kind: ValueKind) -> Self {
        let sig = Signature::new(attrs.iter().map(|a| Attribute::new(*a, kind)).collect())
            .expect("distinct attribute names");
        Schema::new().with_relation(name, sig).expect("fresh schema")
    }

    pub fn relation(&self, name: &str) -> Option<&Signature> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Signature)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Merges another schema in; a relation present in both must have equal signatures.
    pub fn merge(&mut self, other: &Schema) -> Result<(), ModelError> {
        for (name, sig) in &other.relations {
            match self.relations.get(name) {
                Some(existing) if existing != sig => {
                    return Err(ModelError::SchemaMismatch(format!(
                        "relation {name} declared twice with different signatures"
                    )))
                }
                Some(_) => {}
                None => {
                    self.relations.insert(name.clone(), sig.clone());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub u64);

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub relation: String,
    pub values: Vec<Value>,
}

impl Fact {
    pub fn new(relation: impl Into<String>, values: Vec<Value>) -> Self {
        Fact {
            relation: relation.into(),
            values,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// A finite map from record identifiers to facts, plus optional per-row deletion costs.
///
/// Databases are values: operations that change them return a new database.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Database {
    schema: Arc<Schema>,
    rows: BTreeMap<RecordId, Fact>,
    costs: BTreeMap<RecordId, f64>,
}

impl PartialEq for Database {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.rows == other.rows && self.costs == other.costs
    }
}

impl Database {
    pub fn new(schema: Schema) -> Self {
        Database {
            schema: Arc::new(schema),
            rows: BTreeMap::new(),
            costs: BTreeMap::new(),
        }
    }

    pub fn with_shared_schema(schema: Arc<Schema>) -> Self {
        Database {
            schema,
            rows: BTreeMap::new(),
            costs: BTreeMap::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = RecordId> + '_ {
        self.rows.keys().copied()
    }

    pub fn get(&self, id: RecordId) -> Option<&Fact> {
        self.rows.get(&id)
    }

    pub fn contains(&self, id: RecordId) -> bool {
        self.rows.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (RecordId, &Fact)> {
        self.rows.iter().map(|(k, v)| (*k, v))
    }

    /// Ids of the facts over `relation`, ascending.
    pub fn ids_of(&self, relation: &str) -> Vec<RecordId> {
        self.rows
            .iter()
            .filter(|(_, f)| f.relation == relation)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Explicit deletion cost of a row, if one was recorded.
    pub fn explicit_cost(&self, id: RecordId) -> Option<f64> {
        self.costs.get(&id).copied()
    }

    /// Deletion cost recorded for `id`, 1 when none was given.
    pub fn cost_of(&self, id: RecordId) -> f64 {
        self.costs.get(&id).copied().unwrap_or(1.0)
    }

    pub fn has_costs(&self) -> bool {
        !self.costs.is_empty()
    }

    pub fn check_fact(&self, fact: &Fact) -> Result<(), ModelError> {
        let sig = self
            .schema
            .relation(&fact.relation)
            .ok_or_else(|| ModelError::UnknownRelation(fact.relation.clone()))?;
        if sig.arity() != fact.values.len() {
            return Err(ModelError::Arity {
                relation: fact.relation.clone(),
                expected: sig.arity(),
                found: fact.values.len(),
            });
        }
        for (attr, v) in sig.attributes.iter().zip(&fact.values) {
            if attr.kind != v.kind() {
                return Err(ModelError::KindMismatch {
                    attribute: attr.name.clone(),
                    expected: attr.kind,
                });
            }
        }
        Ok(())
    }

    /// Inserts a fact under an explicit id.
    pub fn insert(&mut self, id: RecordId, fact: Fact) -> Result<(), ModelError> {
        self.check_fact(&fact)?;
        if self.rows.contains_key(&id) {
            return Err(ModelError::DuplicateId(id));
        }
        self.rows.insert(id, fact);
        Ok(())
    }

    /// Inserts a fact under the smallest unused id and returns it.
    pub fn push(&mut self, fact: Fact) -> Result<RecordId, ModelError> {
        let id = self.next_free_id();
        self.insert(id, fact)?;
        Ok(id)
    }

    pub fn set_cost(&mut self, id: RecordId, cost: f64) -> Result<(), ModelError> {
        if !(cost.is_finite() && cost > 0.0) {
            return Err(ModelError::InvalidCost(cost));
        }
        self.costs.insert(id, cost);
        Ok(())
    }

    pub fn next_free_id(&self) -> RecordId {
        let mut candidate = 0u64;
        for id in self.rows.keys() {
            if id.0 != candidate {
                break;
            }
            candidate += 1;
        }
        RecordId(candidate)
    }

    pub fn remove(&mut self, id: RecordId) -> Option<Fact> {
        self.costs.remove(&id);
        self.rows.remove(&id)
    }

    pub fn set_value(&mut self, id: RecordId, position: usize, value: Value) -> Result<(), ModelError> {
        let fact = self.rows.get(&id).ok_or(ModelError::MissingId(id))?;
        let sig = self
            .schema
            .relation(&fact.relation)
            .ok_or_else(|| ModelError::UnknownRelation(fact.relation.clone()))?;
        let attr = sig
            .attributes
            .get(position)
            .ok_or_else(|| ModelError::UnknownAttribute(position.to_string()))?;
        if attr.kind != value.kind() {
            return Err(ModelError::KindMismatch {
                attribute: attr.name.clone(),
                expected: attr.kind,
            });
        }
        self.rows.get_mut(&id).expect("checked").values[position] = value;
        Ok(())
    }

    /// The sub-database induced by `ids` (ids not present are ignored).
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a RecordId>) -> Database {
        let mut out = Database::with_shared_schema(Arc::clone(&self.schema));
        for id in ids {
            if let Some(f) = self.rows.get(id) {
                out.rows.insert(*id, f.clone());
                if let Some(c) = self.costs.get(id) {
                    out.costs.insert(*id, *c);
                }
            }
        }
        out
    }

    /// Distinct values of one column, in order of first appearance (ascending id).
    pub fn active_domain(&self, relation: &str, position: usize) -> Vec<Value> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for f in self.rows.values().filter(|f| f.relation == relation) {
            let v = &f.values[position];
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Copies the rows of `other` in, keeping their ids.
    pub fn absorb(&mut self, other: &Database) -> Result<(), ModelError> {
        let mut schema = (*self.schema).clone();
        schema.merge(other.schema())?;
        self.schema = Arc::new(schema);
        for (id, f) in &other.rows {
            if self.rows.contains_key(id) {
                return Err(ModelError::DuplicateId(*id));
            }
            self.rows.insert(*id, f.clone());
        }
        for (id, c) in &other.costs {
            self.costs.insert(*id, *c);
        }
        Ok(())
    }
}

/// `d1 ⊆ d2`: every id of `d1` is in `d2` and maps to the same fact there.
pub fn subset_of(d1: &Database, d2: &Database) -> Result<bool, ModelError> {
    if d1.schema() != d2.schema() {
        return Err(ModelError::SchemaMismatch("databases have different schemas".into()));
    }
    Ok(d1
        .rows
        .iter()
        .all(|(id, f)| d2.rows.get(id).is_some_and(|g| g == f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::single("R", &["A", "B"], ValueKind::Numeric)
    }

    fn db(rows: &[(u64, [f64; 2])]) -> Database {
        let mut d = Database::new(schema());
        for (id, [a, b]) in rows {
            d.insert(RecordId(*id), Fact::new("R", vec![Value::num(*a), Value::num(*b)]))
                .unwrap();
        }
        d
    }

    #[test]
    fn subset_is_reflexive_and_checks_facts() {
        let d = db(&[(0, [1.0, 2.0]), (1, [3.0, 4.0])]);
        assert!(subset_of(&d, &d).unwrap());
        let smaller = db(&[(1, [3.0, 4.0])]);
        assert!(subset_of(&smaller, &d).unwrap());
        assert!(!subset_of(&d, &smaller).unwrap());
        let a = db(&[(0, [1.0, 1.0])]);
        let b = db(&[(0, [1.0, 2.0])]);
        assert!(!subset_of(&a, &b).unwrap());
        assert!(!subset_of(&b, &a).unwrap());
    }

    #[test]
    fn subset_rejects_schema_mismatch() {
        let a = db(&[]);
        let b = Database::new(Schema::single("S", &["A"], ValueKind::Text));
        assert!(subset_of(&a, &b).is_err());
    }

    #[test]
    fn next_free_id_fills_gaps() {
        let d = db(&[(0, [0.0, 0.0]), (1, [0.0, 0.0]), (3, [0.0, 0.0])]);
        assert_eq!(d.next_free_id(), RecordId(2));
        assert_eq!(db(&[]).next_free_id(), RecordId(0));
    }

    #[test]
    fn insert_checks_kinds_and_arity() {
        let mut d = db(&[]);
        assert!(d.insert(RecordId(0), Fact::new("R", vec![Value::num(1.0)])).is_err());
        assert!(d
            .insert(RecordId(0), Fact::new("R", vec![Value::text("x"), Value::num(1.0)]))
            .is_err());
        assert!(d.insert(RecordId(0), Fact::new("S", vec![])).is_err());
    }

    #[test]
    fn signed_zero_values_are_equal() {
        use std::collections::HashSet;
        let mut s = HashSet::new();
        s.insert(Value::num(0.0));
        assert!(s.contains(&Value::num(-0.0)));
    }

    #[test]
    fn active_domain_keeps_first_appearance_order() {
        let d = db(&[(0, [5.0, 0.0]), (1, [2.0, 0.0]), (2, [5.0, 0.0]), (3, [1.0, 0.0])]);
        let dom: Vec<f64> = d.active_domain("R", 0).iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(dom, vec![5.0, 2.0, 1.0]);
    }
}
