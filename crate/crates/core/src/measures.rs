//! Inconsistency measures.

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constraints::{CmpOp, ConstraintSet, DenialConstraint, Term};
use crate::egd::egd_min_repair;
use crate::error::{MeasureError, SolverError};
use crate::model::{Database, RecordId, Value, ValueKind};
use crate::repair::{apply_op, changes, CostModel, RepairOp};
use crate::solver::{build_hitting_set_program, solve_ilp_with, solve_lp, IlpOptions};
use crate::violations::{
    conflict_hypergraph, count_maximal_consistent, minimal_violations, satisfies, ConflictHypergraph, McLimits,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "d")]
    Drastic,
    #[serde(rename = "mi")]
    MICount,
    #[serde(rename = "p")]
    Problematic,
    #[serde(rename = "mc")]
    MaxConsistent,
    #[serde(rename = "mcp")]
    MaxConsistentPrime,
    #[serde(rename = "r")]
    MinRepairSubset,
    #[serde(rename = "rlin")]
    MinRepairSubsetLin,
    #[serde(rename = "rupd")]
    MinRepairUpdate,
    #[serde(rename = "viol")]
    MinViolations,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 9] = [
        MeasureKind::Drastic,
        MeasureKind::MICount,
        MeasureKind::Problematic,
        MeasureKind::MaxConsistent,
        MeasureKind::MaxConsistentPrime,
        MeasureKind::MinRepairSubset,
        MeasureKind::MinRepairSubsetLin,
        MeasureKind::MinRepairUpdate,
        MeasureKind::MinViolations,
    ];

    pub fn token(self) -> &'static str {
        match self {
            MeasureKind::Drastic => "d",
            MeasureKind::MICount => "mi",
            MeasureKind::Problematic => "p",
            MeasureKind::MaxConsistent => "mc",
            MeasureKind::MaxConsistentPrime => "mcp",
            MeasureKind::MinRepairSubset => "r",
            MeasureKind::MinRepairSubsetLin => "rlin",
            MeasureKind::MinRepairUpdate => "rupd",
            MeasureKind::MinViolations => "viol",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        MeasureKind::ALL.into_iter().find(|k| k.token() == s)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MeasureKind::from_token(s.trim()).ok_or_else(|| {
            let known: Vec<&str> = MeasureKind::ALL.iter().map(|k| k.token()).collect();
            format!("unknown measure `{s}` (expected one of {})", known.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub measure: MeasureKind,
    pub value: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl MeasureValue {
    fn exact(measure: MeasureKind, value: f64) -> Self {
        MeasureValue {
            measure,
            value,
            exact: true,
            details: None,
        }
    }

    fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConfig {
    pub mc: McLimits,
    pub ilp: IlpOptions,
    pub costs: CostModel,
    /// Largest number of cell updates tried by the update-repair search.
    pub max_updates: usize,
    /// Candidate databases the update-repair search may check.
    pub update_budget: u64,
    pub update_values: UpdateValues,
    pub update_scope: UpdateScope,
}

/// Values an updated cell may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateValues {
    /// Values already present in the cell's column.
    ActiveDomain,
    /// The active domain plus one fresh value per cell.
    #[default]
    WithFresh,
}

/// Cells the update-repair search may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateScope {
    /// Every attribute some constraint mentions.
    Constrained,
    /// Only attributes compared by some predicate other than `=` (for an FD,
    /// its right-hand side). A constraint made of equalities alone keeps all
    /// of its attributes.
    #[default]
    Consequents,
}

impl UpdateScope {
    fn attributes(self, sigma: &ConstraintSet) -> std::collections::BTreeSet<(String, usize)> {
        match self {
            UpdateScope::Constrained => sigma.attributes_used(),
            UpdateScope::Consequents => sigma
                .iter()
                .flat_map(|c| {
                    let cells: Vec<(String, usize)> = c
                        .predicates
                        .iter()
                        .filter(|p| p.op != CmpOp::Eq)
                        .flat_map(|p| [&p.lhs, &p.rhs])
                        .filter_map(|t| match t {
                            Term::Attr { var, pos, .. } => Some((c.vars[*var].relation.clone(), *pos)),
                            Term::Const(_) => None,
                        })
                        .collect();
                    if cells.is_empty() {
                        c.attributes_used().into_iter().collect()
                    } else {
                        cells
                    }
                })
                .collect(),
        }
    }
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            mc: McLimits::default(),
            ilp: IlpOptions::default(),
            costs: CostModel::default(),
            max_updates: 5,
            update_budget: 2_000_000,
            update_values: UpdateValues::default(),
            update_scope: UpdateScope::default(),
        }
    }
}

/// Evaluates measures on one database, sharing the conflict hypergraph.
pub struct Evaluator<'a> {
    db: &'a Database,
    sigma: &'a ConstraintSet,
    config: MeasureConfig,
    graph: OnceCell<ConflictHypergraph>,
}

impl<'a> Evaluator<'a> {
    pub fn new(db: &'a Database, sigma: &'a ConstraintSet, config: MeasureConfig) -> Result<Self, MeasureError> {
        sigma
            .check_schema(db.schema())
            .map_err(|m| MeasureError::Engine(crate::error::EngineError::SchemaMismatch(m)))?;
        Ok(Evaluator {
            db,
            sigma,
            config,
            graph: OnceCell::new(),
        })
    }

    pub fn graph(&self) -> &ConflictHypergraph {
        self.graph
            .get_or_init(|| conflict_hypergraph(self.db, self.sigma).expect("schema checked in Evaluator::new"))
    }

    pub fn evaluate(&self, kind: MeasureKind) -> Result<MeasureValue, MeasureError> {
        let g = || self.graph();
        Ok(match kind {
            MeasureKind::Drastic => {
                let v = if g().edges.is_empty() { 0.0 } else { 1.0 };
                MeasureValue::exact(kind, v)
            }
            MeasureKind::MICount => MeasureValue::exact(kind, g().edges.len() as f64),
            MeasureKind::Problematic => MeasureValue::exact(kind, g().problematic().len() as f64),
            MeasureKind::MaxConsistent | MeasureKind::MaxConsistentPrime => {
                let c = count_maximal_consistent(g(), self.config.mc);
                let extra = if kind == MeasureKind::MaxConsistentPrime {
                    g().self_inconsistent().len() as f64
                } else {
                    0.0
                };
                let mut v = MeasureValue::exact(kind, c.count - 1.0 + extra);
                if !c.exact {
                    v.exact = false;
                    v.details = Some(json!({ "lower_bound": v.value }));
                }
                v
            }
            MeasureKind::MinRepairSubset => self.min_repair_subset()?,
            MeasureKind::MinRepairSubsetLin => self.min_repair_lin()?,
            MeasureKind::MinRepairUpdate => {
                if g().edges.is_empty() {
                    MeasureValue::exact(kind, 0.0)
                } else {
                    i_r_update_with(self.db, self.sigma, &self.config)?
                }
            }
            MeasureKind::MinViolations => {
                let v = if g().edges.is_empty() {
                    0
                } else {
                    minimal_violations(self.db, self.sigma)?.len()
                };
                MeasureValue::exact(kind, v as f64)
            }
        })
    }

    fn deletion_cost(&self, id: RecordId) -> f64 {
        self.config.costs.deletion(self.db, id)
    }

    fn min_repair_subset(&self) -> Result<MeasureValue, MeasureError> {
        let kind = MeasureKind::MinRepairSubset;
        let g = self.graph();
        let lp = build_hitting_set_program(&g.edges, &g.vertices, |id| self.deletion_cost(id))?;
        match solve_ilp_with(&lp, self.config.ilp) {
            Ok(sol) => {
                let deleted: Vec<u64> = g
                    .vertices
                    .iter()
                    .zip(&sol.assignment)
                    .filter(|(_, x)| **x > 0.5)
                    .map(|(id, _)| id.0)
                    .collect();
                Ok(MeasureValue::exact(kind, sol.value).with_details(json!({ "deleted": deleted })))
            }
            Err(SolverError::NodeBudgetExceeded { lower, upper, .. }) => Ok(MeasureValue {
                measure: kind,
                value: upper,
                exact: false,
                details: Some(json!({ "lower": lower, "upper": upper })),
            }),
            Err(e) => Err(e.into()),
        }
    }

    fn min_repair_lin(&self) -> Result<MeasureValue, MeasureError> {
        let g = self.graph();
        let lp = build_hitting_set_program(&g.edges, &g.vertices, |id| self.deletion_cost(id))?;
        let sol = solve_lp(&lp)?;
        let assignment: serde_json::Map<String, serde_json::Value> = g
            .vertices
            .iter()
            .zip(&sol.assignment)
            .filter(|(_, x)| **x > 0.0)
            .map(|(id, x)| (id.0.to_string(), json!(x)))
            .collect();
        Ok(MeasureValue::exact(MeasureKind::MinRepairSubsetLin, sol.value)
            .with_details(json!({ "assignment": assignment })))
    }
}

pub fn measure(
    kind: MeasureKind,
    db: &Database,
    sigma: &ConstraintSet,
    config: &MeasureConfig,
) -> Result<MeasureValue, MeasureError> {
    Evaluator::new(db, sigma, *config)?.evaluate(kind)
}

/// Evaluates several measures on the same database.
pub fn evaluate_all(
    kinds: &[MeasureKind],
    db: &Database,
    sigma: &ConstraintSet,
    config: &MeasureConfig,
) -> Result<Vec<Result<MeasureValue, MeasureError>>, MeasureError> {
    let ev = Evaluator::new(db, sigma, *config)?;
    Ok(kinds.iter().map(|k| ev.evaluate(*k)).collect())
}

pub fn i_drastic(db: &Database, sigma: &ConstraintSet) -> Result<MeasureValue, MeasureError> {
    let v = if satisfies(db, sigma)? { 0.0 } else { 1.0 };
    Ok(MeasureValue::exact(MeasureKind::Drastic, v))
}

pub fn i_mi(db: &Database, sigma: &ConstraintSet) -> Result<MeasureValue, MeasureError> {
    measure(MeasureKind::MICount, db, sigma, &MeasureConfig::default())
}

pub fn i_p(db: &Database, sigma: &ConstraintSet) -> Result<MeasureValue, MeasureError> {
    measure(MeasureKind::Problematic, db, sigma, &MeasureConfig::default())
}

pub fn i_mc(db: &Database, sigma: &ConstraintSet, limits: McLimits) -> Result<MeasureValue, MeasureError> {
    let config = MeasureConfig {
        mc: limits,
        ..MeasureConfig::default()
    };
    measure(MeasureKind::MaxConsistent, db, sigma, &config)
}

pub fn i_mc_prime(db: &Database, sigma: &ConstraintSet, limits: McLimits) -> Result<MeasureValue, MeasureError> {
    let config = MeasureConfig {
        mc: limits,
        ..MeasureConfig::default()
    };
    measure(MeasureKind::MaxConsistentPrime, db, sigma, &config)
}

pub fn i_r_subset(db: &Database, sigma: &ConstraintSet, costs: &CostModel) -> Result<MeasureValue, MeasureError> {
    let config = MeasureConfig {
        costs: *costs,
        ..MeasureConfig::default()
    };
    measure(MeasureKind::MinRepairSubset, db, sigma, &config)
}

pub fn i_r_lin(db: &Database, sigma: &ConstraintSet, costs: &CostModel) -> Result<MeasureValue, MeasureError> {
    let config = MeasureConfig {
        costs: *costs,
        ..MeasureConfig::default()
    };
    measure(MeasureKind::MinRepairSubsetLin, db, sigma, &config)
}

/// Minimum deletion cost for a single tractable EGD, without solving an ILP.
pub fn i_r_egd_tractable(
    db: &Database,
    sigma: &DenialConstraint,
    costs: &CostModel,
) -> Result<MeasureValue, MeasureError> {
    let rep = egd_min_repair(db, sigma, |id| costs.deletion(db, id))?;
    let deleted: Vec<u64> = rep.deleted.iter().map(|id| id.0).collect();
    Ok(MeasureValue::exact(MeasureKind::MinRepairSubset, rep.cost).with_details(json!({ "deleted": deleted })))
}

pub fn i_min_violations(db: &Database, sigma: &ConstraintSet) -> Result<MeasureValue, MeasureError> {
    Ok(MeasureValue::exact(
        MeasureKind::MinViolations,
        minimal_violations(db, sigma)?.len() as f64,
    ))
}

pub fn i_r_update(db: &Database, sigma: &ConstraintSet, max_updates: usize) -> Result<MeasureValue, MeasureError> {
    let config = MeasureConfig {
        max_updates,
        ..MeasureConfig::default()
    };
    i_r_update_with(db, sigma, &config)
}

/// Fewest cell updates reaching consistency, by iterative deepening over sets of
/// cells. Each cell may take a value from its column's active domain and, with
/// [`UpdateValues::WithFresh`], one fresh value of its own. Returns `+∞` (inexact) when no repair uses at most
/// `max_updates` cells.
pub fn i_r_update_with(
    db: &Database,
    sigma: &ConstraintSet,
    config: &MeasureConfig,
) -> Result<MeasureValue, MeasureError> {
    let kind = MeasureKind::MinRepairUpdate;
    let graph = conflict_hypergraph(db, sigma)?;
    if graph.edges.is_empty() {
        return Ok(MeasureValue::exact(kind, 0.0));
    }
    let mut search = UpdateSearch::new(db, sigma, &graph, config);
    for k in 1..=config.max_updates.min(search.cells.len()) {
        if let Some(ops) = search.with_cells(k)? {
            let text: Vec<String> = ops.iter().map(ToString::to_string).collect();
            return Ok(MeasureValue::exact(kind, k as f64 * config.costs.update)
                .with_details(json!({ "updates": text })));
        }
    }
    Ok(MeasureValue {
        measure: kind,
        value: f64::INFINITY,
        exact: false,
        details: Some(json!({ "max_updates": config.max_updates })),
    })
}

struct Cell {
    id: RecordId,
    pos: usize,
    attribute: String,
    candidates: Vec<Value>,
    /// Bit mask of the minimal inconsistent subsets containing this cell's fact.
    hits: Vec<u64>,
}

struct UpdateSearch<'a> {
    sigma: &'a ConstraintSet,
    work: Database,
    cells: Vec<Cell>,
    edge_words: usize,
    edges: usize,
    checked: u64,
    budget: u64,
}

impl<'a> UpdateSearch<'a> {
    fn new(
        db: &Database,
        sigma: &'a ConstraintSet,
        graph: &ConflictHypergraph,
        config: &MeasureConfig,
    ) -> Self {
        let used = config.update_scope.attributes(sigma);
        let edge_words = graph.edges.len().div_ceil(64);
        let fresh_base = db
            .iter()
            .flat_map(|(_, f)| f.values.iter())
            .filter_map(Value::as_f64)
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .floor()
            + 1.0;
        let mut cells = Vec::new();
        for (id, fact) in db.iter() {
            let sig = db.schema().relation(&fact.relation).expect("facts match the schema");
            let mut hits = vec![0u64; edge_words];
            for (e, edge) in graph.edges.iter().enumerate() {
                if edge.ids.binary_search(&id).is_ok() {
                    hits[e / 64] |= 1 << (e % 64);
                }
            }
            for (pos, attr) in sig.attributes.iter().enumerate() {
                if !used.contains(&(fact.relation.clone(), pos)) {
                    continue;
                }
                let current = &fact.values[pos];
                let domain = db.active_domain(&fact.relation, pos);
                let fresh = match attr.kind {
                    ValueKind::Numeric => Value::num(fresh_base + cells.len() as f64),
                    ValueKind::Text => {
                        let mut s = format!("_fresh{}", cells.len());
                        while domain.iter().any(|v| v.as_f64().is_none() && v.to_string() == s) {
                            s.push('_');
                        }
                        Value::text(s)
                    }
                };
                let mut candidates: Vec<Value> = domain.into_iter().filter(|v| v != current).collect();
                if config.update_values == UpdateValues::WithFresh {
                    candidates.push(fresh);
                }
                cells.push(Cell {
                    id,
                    pos,
                    attribute: attr.name.clone(),
                    candidates,
                    hits: hits.clone(),
                });
            }
        }
        UpdateSearch {
            sigma,
            work: db.clone(),
            cells,
            edge_words,
            edges: graph.edges.len(),
            checked: 0,
            budget: config.update_budget,
        }
    }

    fn with_cells(&mut self, k: usize) -> Result<Option<Vec<RepairOp>>, MeasureError> {
        let mut chosen = Vec::with_capacity(k);
        let covered = vec![0u64; self.edge_words];
        self.choose(0, k, &mut chosen, &covered)
    }

    fn all_covered(&self, covered: &[u64], total: usize) -> bool {
        (0..total).all(|e| covered[e / 64] >> (e % 64) & 1 == 1)
    }

    fn choose(
        &mut self,
        start: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        covered: &[u64],
    ) -> Result<Option<Vec<RepairOp>>, MeasureError> {
        let total_edges = self.edges;
        if chosen.len() == k {
            if !self.all_covered(covered, total_edges) {
                return Ok(None);
            }
            return self.assign(chosen, 0);
        }
        for c in start..self.cells.len() {
            if self.cells.len() - c < k - chosen.len() {
                break;
            }
            let next: Vec<u64> = covered.iter().zip(&self.cells[c].hits).map(|(a, b)| a | b).collect();
            chosen.push(c);
            let found = self.choose(c + 1, k, chosen, &next)?;
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    fn assign(&mut self, chosen: &[usize], at: usize) -> Result<Option<Vec<RepairOp>>, MeasureError> {
        if at == chosen.len() {
            self.checked += 1;
            if self.checked > self.budget {
                return Err(MeasureError::SearchBudget(self.budget));
            }
            if satisfies(&self.work, self.sigma)? {
                let ops = chosen
                    .iter()
                    .map(|&c| {
                        let cell = &self.cells[c];
                        RepairOp::Update {
                            id: cell.id,
                            attribute: cell.attribute.clone(),
                            value: self.work.get(cell.id).expect("present").values[cell.pos].clone(),
                        }
                    })
                    .collect();
                return Ok(Some(ops));
            }
            return Ok(None);
        }
        let c = chosen[at];
        let (id, pos) = (self.cells[c].id, self.cells[c].pos);
        let original = self.work.get(id).expect("present").values[pos].clone();
        for i in 0..self.cells[c].candidates.len() {
            let v = self.cells[c].candidates[i].clone();
            self.work.set_value(id, pos, v).expect("candidate has the column's kind");
            let found = self.assign(chosen, at + 1)?;
            if found.is_some() {
                self.work.set_value(id, pos, original).expect("restoring");
                return Ok(found);
            }
        }
        self.work.set_value(id, pos, original).expect("restoring");
        Ok(None)
    }
}

/// `I(Σ, D) − I(Σ, op(D))`; zero when `op` does not change `db`.
pub fn delta(
    kind: MeasureKind,
    sigma: &ConstraintSet,
    op: &RepairOp,
    db: &Database,
    config: &MeasureConfig,
) -> Result<f64, MeasureError> {
    if !changes(db, op) {
        return Ok(0.0);
    }
    let before = measure(kind, db, sigma, config)?.value;
    let after = measure(kind, &apply_op(db, op), sigma, config)?.value;
    Ok(before - after)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_constraints;
    use crate::model::{Fact, Schema};

    fn db(rows: &[[i64; 2]]) -> Database {
        let mut d = Database::new(Schema::single("R", &["A", "B"], ValueKind::Numeric));
        for r in rows {
            d.push(Fact::new("R", r.iter().map(|x| Value::from(*x)).collect())).unwrap();
        }
        d
    }

    #[test]
    fn tokens_round_trip() {
        for k in MeasureKind::ALL {
            assert_eq!(k.token().parse::<MeasureKind>().unwrap(), k);
            assert_eq!(serde_json::to_value(k).unwrap(), json!(k.token()));
        }
        assert!("x".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn star_conflicts() {
        let d = db(&[[0, 0], [0, 1], [0, 2], [1, 0]]);
        let s = parse_constraints("FD R: A -> B", d.schema()).unwrap();
        let cfg = MeasureConfig::default();
        let vals: Vec<f64> = evaluate_all(&MeasureKind::ALL, &d, &s, &cfg)
            .unwrap()
            .into_iter()
            .map(|v| v.unwrap().value)
            .collect();
        // d mi p mc mcp r rlin rupd viol
        assert_eq!(vals, vec![1.0, 3.0, 3.0, 2.0, 2.0, 2.0, 1.5, 2.0, 3.0]);
    }

    #[test]
    fn zero_on_consistent() {
        let d = db(&[[0, 0], [1, 1]]);
        let s = parse_constraints("FD R: A -> B", d.schema()).unwrap();
        for k in MeasureKind::ALL {
            assert_eq!(measure(k, &d, &s, &MeasureConfig::default()).unwrap().value, 0.0, "{k}");
        }
    }

    #[test]
    fn delta_of_absent_id_is_zero() {
        let d = db(&[[0, 0], [0, 1]]);
        let s = parse_constraints("FD R: A -> B", d.schema()).unwrap();
        let cfg = MeasureConfig::default();
        assert_eq!(delta(MeasureKind::MICount, &s, &RepairOp::delete(9), &d, &cfg).unwrap(), 0.0);
        assert_eq!(delta(MeasureKind::MICount, &s, &RepairOp::delete(0), &d, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn update_search_gives_up_past_the_bound() {
        let d = db(&[[0, 0], [0, 1], [0, 2]]);
        let s = parse_constraints("FD R: A -> B", d.schema()).unwrap();
        let v = i_r_update(&d, &s, 1).unwrap();
        assert!(!v.exact && v.value.is_infinite());
        assert_eq!(i_r_update(&d, &s, 3).unwrap().value, 2.0);
    }
}
