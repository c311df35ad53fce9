use thiserror::Error;

use crate::model::{RecordId, ValueKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("relation `{relation}` has arity {expected}, fact has {found} values")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("attribute `{attribute}` expects a {expected} value")]
    KindMismatch { attribute: String, expected: ValueKind },
    #[error("duplicate record id {0}")]
    DuplicateId(RecordId),
    #[error("no record with id {0}")]
    MissingId(RecordId),
    #[error("deletion cost must be a positive finite number, got {0}")]
    InvalidCost(f64),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("header: {0}")]
    Header(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Constraint text that failed to parse, with a 1-based position.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("enumeration stopped after {found} maximal consistent subsets (limit {limit})")]
    LimitExceeded { found: usize, limit: usize },
    #[error("hypergraph has {vertices} conflicting facts, above the exhaustive-search cap of {cap}")]
    CapExceeded { vertices: usize, cap: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("program is malformed: {0}")]
    Malformed(String),
    #[error("simplex failed: {0}")]
    NumericalFailure(String),
    #[error("branch-and-bound node budget of {budget} exhausted (bounds {lower}..{upper})")]
    NodeBudgetExceeded { budget: usize, lower: f64, upper: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("constraint `{label}` is not a tractable EGD ({shape})")]
    NotTractable { label: String, shape: String },
    #[error("update-repair search budget of {0} candidate databases exhausted")]
    SearchBudget(u64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("no constraints to draw from")]
    NoConstraints,
    #[error("relation `{relation}` has {have} facts, constraint needs {need}")]
    TooFewTuples {
        relation: String,
        have: usize,
        need: usize,
    },
    #[error("no attribute occurs in a constraint")]
    NoRelevantCells,
    #[error("alpha must be in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("{name} must be {expected}, got {value}")]
    BadParameter {
        name: &'static str,
        expected: &'static str,
        value: f64,
    },
    #[error("graph input: {0}")]
    Graph(String),
}
