//! Two-atom equality-generating dependencies: shape classification and
//! polynomial minimum-deletion algorithms for the tractable shapes.
//!
//! A two-variable constraint is read as an EGD when all of its predicates
//! compare attributes (no constants), all but one are equalities, and the
//! remaining one is a disequality (the negated consequent). Equalities merge
//! attribute slots into classes, which play the role of the EGD's variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constraints::{CmpOp, DenialConstraint, Term};
use crate::error::MeasureError;
use crate::model::{Database, RecordId, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialForm {
    /// `R(x1,x2), R(x1,x2) ⇒ x1 = x2`
    RepeatedAtom,
    /// `R(x1,x2), R(x1,x3) ⇒ ...`
    CommonFirst,
    /// `R(x1,x2), R(x3,x2) ⇒ ...`
    CommonSecond,
    /// `R(x1,x2), R(x2,x1) ⇒ x1 = x2`
    SwappedPair,
    /// Shared variable plus a repeated variable inside an atom, e.g. `R(x1,x1), R(x1,x2)`.
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EgdShape {
    /// An FD over a relation of arity other than two.
    FdShape,
    TwoRelationShape,
    SingleRelNoShareShape,
    /// `R(x1,x2), R(x2,x3) ⇒ xi = xj`; indices are 1-based.
    SelfJoinChainHard { i: u8, j: u8 },
    SelfJoinSpecial(SpecialForm),
    NotAnEgd,
}

impl EgdShape {
    pub fn is_tractable(self) -> bool {
        !matches!(self, EgdShape::SelfJoinChainHard { .. } | EgdShape::NotAnEgd)
    }
}

impl fmt::Display for EgdShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EgdShape::FdShape => f.write_str("fd"),
            EgdShape::TwoRelationShape => f.write_str("two-relation"),
            EgdShape::SingleRelNoShareShape => f.write_str("single-relation-no-share"),
            EgdShape::SelfJoinChainHard { i, j } => write!(f, "chain-hard(x{i}=x{j})"),
            EgdShape::SelfJoinSpecial(k) => write!(
                f,
                "special({})",
                match k {
                    SpecialForm::RepeatedAtom => "repeated-atom",
                    SpecialForm::CommonFirst => "common-first",
                    SpecialForm::CommonSecond => "common-second",
                    SpecialForm::SwappedPair => "swapped-pair",
                    SpecialForm::Loop => "loop",
                }
            ),
            EgdShape::NotAnEgd => f.write_str("not-an-egd"),
        }
    }
}

/// Slot = (variable 0 or 1, attribute position).
type Slot = (usize, usize);

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The EGD reading of a two-variable constraint.
struct EgdForm {
    arity: [usize; 2],
    /// Class id of each slot; slot (v, p) is at index `v * arity[0] + p` for v = 0.
    class_of: Vec<usize>,
    consequent: (Slot, Slot),
}

impl EgdForm {
    fn index(&self, (v, p): Slot) -> usize {
        if v == 0 {
            p
        } else {
            self.arity[0] + p
        }
    }

    fn class(&self, s: Slot) -> usize {
        self.class_of[self.index(s)]
    }

    fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.arity[0])
            .map(|p| (0, p))
            .chain((0..self.arity[1]).map(|p| (1, p)))
    }

    fn positions(&self, class: usize, var: usize) -> Vec<usize> {
        self.slots()
            .filter(|s| s.0 == var && self.class(*s) == class)
            .map(|s| s.1)
            .collect()
    }

    /// Classes that occur in both atoms, ascending.
    fn shared_classes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .slots()
            .filter(|s| s.0 == 0)
            .map(|s| self.class(s))
            .filter(|c| !self.positions(*c, 1).is_empty())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn has_internal_equality(&self, var: usize) -> bool {
        let n = self.arity[var];
        (0..n).any(|a| (a + 1..n).any(|b| self.class((var, a)) == self.class((var, b))))
    }
}

fn read_form(sigma: &DenialConstraint, arities: [usize; 2]) -> Option<EgdForm> {
    let n = arities[0] + arities[1];
    let idx = |v: usize, p: usize| if v == 0 { p } else { arities[0] + p };
    let mut uf = UnionFind::new(n);
    let mut consequent = None;
    for p in &sigma.predicates {
        let (a, b) = match (&p.lhs, &p.rhs) {
            (Term::Attr { var: v1, pos: p1, .. }, Term::Attr { var: v2, pos: p2, .. }) => ((*v1, *p1), (*v2, *p2)),
            _ => return None,
        };
        match p.op {
            CmpOp::Eq => uf.union(idx(a.0, a.1), idx(b.0, b.1)),
            CmpOp::Ne if consequent.is_none() => consequent = Some((a, b)),
            _ => return None,
        }
    }
    let consequent = consequent?;
    let class_of = (0..n).map(|i| uf.find(i)).collect();
    let form = EgdForm {
        arity: arities,
        class_of,
        consequent,
    };
    if form.class(consequent.0) == form.class(consequent.1) {
        // the consequent already follows from the premise
        return None;
    }
    Some(form)
}

fn form_of(sigma: &DenialConstraint, db_arity: impl Fn(&str) -> Option<usize>) -> Option<EgdForm> {
    if sigma.vars.len() != 2 {
        return None;
    }
    let a0 = db_arity(&sigma.vars[0].relation)?;
    let a1 = db_arity(&sigma.vars[1].relation)?;
    read_form(sigma, [a0, a1])
}

/// Arity of each relation as far as the constraint reveals it (highest position used + 1,
/// at least 2). Classification only needs to know whether atoms are binary.
fn arity_from_constraint(sigma: &DenialConstraint) -> impl Fn(&str) -> Option<usize> + '_ {
    move |rel: &str| {
        let mut max = 0;
        for p in &sigma.predicates {
            for t in [&p.lhs, &p.rhs] {
                if let Term::Attr { var, pos, .. } = t {
                    if sigma.vars[*var].relation == rel {
                        max = max.max(*pos + 1);
                    }
                }
            }
        }
        Some(max.max(2))
    }
}

/// Whether facts able to play both atoms get the same block key from either role.
fn decomposable(form: &EgdForm, same_relation: bool) -> bool {
    if !same_relation || form.arity[0] != form.arity[1] {
        return true;
    }
    let n = form.arity[0];
    let mut pos_uf = UnionFind::new(n);
    for var in 0..2 {
        for a in 0..n {
            for b in a + 1..n {
                if form.class((var, a)) == form.class((var, b)) {
                    pos_uf.union(a, b);
                }
            }
        }
    }
    form.shared_classes().into_iter().all(|c| {
        let pa = form.positions(c, 0);
        let pb = form.positions(c, 1);
        pa.iter().any(|&i| pb.iter().any(|&j| pos_uf.find(i) == pos_uf.find(j)))
    })
}

/// Classifies a constraint. Relations are assumed binary unless the constraint
/// mentions a position beyond the second; use [`classify_egd_in`] to classify
/// against an actual schema.
pub fn classify_egd(sigma: &DenialConstraint) -> EgdShape {
    classify_with(sigma, arity_from_constraint(sigma))
}

/// Classifies a constraint using the relation arities of `db`'s schema.
pub fn classify_egd_in(sigma: &DenialConstraint, db: &Database) -> EgdShape {
    classify_with(sigma, |r: &str| db.schema().relation(r).map(|s| s.arity()))
}

fn classify_with(sigma: &DenialConstraint, arity: impl Fn(&str) -> Option<usize>) -> EgdShape {
    let Some(form) = form_of(sigma, &arity) else {
        return EgdShape::NotAnEgd;
    };
    let binary = form.arity == [2, 2];
    let same_relation = sigma.vars[0].relation == sigma.vars[1].relation;
    if !binary {
        return if sigma.as_fd().is_some() {
            EgdShape::FdShape
        } else {
            EgdShape::NotAnEgd
        };
    }
    if !same_relation {
        return EgdShape::TwoRelationShape;
    }
    let shared = form.shared_classes();
    if shared.is_empty() {
        return EgdShape::SingleRelNoShareShape;
    }
    let internal = form.has_internal_equality(0) || form.has_internal_equality(1);
    if internal {
        return EgdShape::SelfJoinSpecial(SpecialForm::Loop);
    }
    // No repeated variable inside an atom: every shared class links exactly one
    // position of each atom.
    let links: Vec<(usize, usize)> = shared
        .iter()
        .map(|c| (form.positions(*c, 0)[0], form.positions(*c, 1)[0]))
        .collect();
    let has = |l: (usize, usize)| links.contains(&l);
    match links.len() {
        2 if has((0, 0)) && has((1, 1)) => EgdShape::SelfJoinSpecial(SpecialForm::RepeatedAtom),
        2 => EgdShape::SelfJoinSpecial(SpecialForm::SwappedPair),
        1 if has((0, 0)) => EgdShape::SelfJoinSpecial(SpecialForm::CommonFirst),
        1 if has((1, 1)) => EgdShape::SelfJoinSpecial(SpecialForm::CommonSecond),
        1 => {
            // chain: the atom whose second slot is shared comes first
            let first = if has((1, 0)) { 0 } else { 1 };
            let second = 1 - first;
            let x = |s: Slot| -> u8 {
                if s == (first, 0) {
                    1
                } else if s == (second, 1) {
                    3
                } else {
                    2
                }
            };
            let (a, b) = form.consequent;
            EgdShape::SelfJoinChainHard { i: x(a), j: x(b) }
        }
        _ => unreachable!("binary atoms share at most two classes"),
    }
}

/// A minimum-cost deletion set and its cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgdRepair {
    pub cost: f64,
    pub deleted: Vec<RecordId>,
}

/// Minimum total deletion cost making `db` satisfy the single constraint `sigma`,
/// computed block by block in polynomial time.
pub fn egd_min_repair(
    db: &Database,
    sigma: &DenialConstraint,
    cost: impl Fn(RecordId) -> f64,
) -> Result<EgdRepair, MeasureError> {
    let shape = classify_egd_in(sigma, db);
    let not_tractable = || MeasureError::NotTractable {
        label: sigma.label.clone(),
        shape: shape.to_string(),
    };
    if !shape.is_tractable() {
        return Err(not_tractable());
    }
    let form = form_of(sigma, |r: &str| db.schema().relation(r).map(|s| s.arity())).ok_or_else(not_tractable)?;
    if shape == EgdShape::SelfJoinSpecial(SpecialForm::SwappedPair) {
        return Ok(swapped_pairs(db, &sigma.vars[0].relation, &cost));
    }
    debug_assert!(decomposable(&form, sigma.vars[0].relation == sigma.vars[1].relation));
    Ok(block_repair(db, sigma, &form, &cost))
}

fn swapped_pairs(db: &Database, relation: &str, cost: &impl Fn(RecordId) -> f64) -> EgdRepair {
    let mut groups: BTreeMap<(Value, Value), Vec<RecordId>> = BTreeMap::new();
    for id in db.ids_of(relation) {
        let f = db.get(id).expect("listed id");
        if f.values[0] != f.values[1] {
            groups
                .entry((f.values[0].clone(), f.values[1].clone()))
                .or_default()
                .push(id);
        }
    }
    let mut out = EgdRepair {
        cost: 0.0,
        deleted: Vec::new(),
    };
    let group_cost = |ids: &[RecordId]| ids.iter().map(|i| cost(*i)).sum::<f64>();
    for ((a, b), ids) in &groups {
        if a.total_cmp(b).is_gt() {
            continue;
        }
        if let Some(other) = groups.get(&(b.clone(), a.clone())) {
            let (ca, cb) = (group_cost(ids), group_cost(other));
            let drop = if ca <= cb { ids } else { other };
            out.cost += ca.min(cb);
            out.deleted.extend(drop);
        }
    }
    out.deleted.sort_unstable();
    out
}

#[derive(Default)]
struct Block {
    /// (id, in A, in B)
    members: Vec<(RecordId, bool, bool)>,
}

fn block_repair(
    db: &Database,
    sigma: &DenialConstraint,
    form: &EgdForm,
    cost: &impl Fn(RecordId) -> f64,
) -> EgdRepair {
    let shared = form.shared_classes();
    let matches_atom = |values: &[Value], var: usize| -> bool {
        let n = form.arity[var];
        (0..n).all(|a| (a + 1..n).all(|b| form.class((var, a)) != form.class((var, b)) || values[a] == values[b]))
    };
    let key = |values: &[Value], var: usize| -> Vec<Value> {
        shared
            .iter()
            .map(|c| values[form.positions(*c, var)[0]].clone())
            .collect()
    };

    let mut blocks: HashMap<Vec<Value>, Block> = HashMap::new();
    let mut order: Vec<Vec<Value>> = Vec::new();
    for (id, fact) in db.iter() {
        let in_a = fact.relation == sigma.vars[0].relation && matches_atom(&fact.values, 0);
        let in_b = fact.relation == sigma.vars[1].relation && matches_atom(&fact.values, 1);
        if !in_a && !in_b {
            continue;
        }
        let k = if in_a { key(&fact.values, 0) } else { key(&fact.values, 1) };
        let block = blocks.entry(k.clone()).or_insert_with(|| {
            order.push(k);
            Block::default()
        });
        block.members.push((id, in_a, in_b));
    }

    // Which atom supplies the value of each consequent class.
    let (p_slot, q_slot) = form.consequent;
    let source = |slot: Slot| -> Slot {
        let c = form.class(slot);
        match form.positions(c, 0).first() {
            Some(&p) => (0, p),
            None => (1, form.positions(c, 1)[0]),
        }
    };
    let (p, q) = (source(p_slot), source(q_slot));

    let mut out = EgdRepair {
        cost: 0.0,
        deleted: Vec::new(),
    };
    for k in &order {
        let block = &blocks[k];
        let val = |id: RecordId, slot: Slot| &db.get(id).expect("block member").values[slot.1];
        let sum = |pred: &dyn Fn(&(RecordId, bool, bool)) -> bool| -> (f64, Vec<RecordId>) {
            let ids: Vec<RecordId> = block.members.iter().filter(|m| pred(m)).map(|m| m.0).collect();
            (ids.iter().map(|i| cost(*i)).sum(), ids)
        };
        let all_a = sum(&|m| m.1);
        let all_b = sum(&|m| m.2);
        let best = if p.0 == 0 && q.0 == 0 {
            let bad_a = sum(&|m| m.1 && val(m.0, p) != val(m.0, q));
            if bad_a.0 <= all_b.0 {
                bad_a
            } else {
                all_b
            }
        } else if p.0 == 1 && q.0 == 1 {
            let bad_b = sum(&|m| m.2 && val(m.0, p) != val(m.0, q));
            if all_a.0 <= bad_b.0 {
                all_a
            } else {
                bad_b
            }
        } else {
            // one value must be shared by the A-side class and the B-side class
            let (pa, qb) = if p.0 == 0 { (p, q) } else { (q, p) };
            let mut kept: Vec<(Value, f64)> = Vec::new();
            for &(id, in_a, in_b) in &block.members {
                let allowed = match (in_a, in_b) {
                    (true, true) if val(id, pa) == val(id, qb) => Some(val(id, pa)),
                    (true, true) => None,
                    (true, false) => Some(val(id, pa)),
                    (false, true) => Some(val(id, qb)),
                    (false, false) => None,
                };
                if let Some(v) = allowed {
                    match kept.iter_mut().find(|(w, _)| w == v) {
                        Some(entry) => entry.1 += cost(id),
                        None => kept.push((v.clone(), cost(id))),
                    }
                }
            }
            let total: f64 = block.members.iter().map(|m| cost(m.0)).sum();
            let mut best = if all_a.0 <= all_b.0 { all_a } else { all_b };
            if let Some((v, k)) = kept
                .iter()
                .fold(None::<&(Value, f64)>, |acc, e| match acc {
                    Some(a) if a.1 >= e.1 => Some(a),
                    _ => Some(e),
                })
            {
                if total - k < best.0 {
                    let ids = block
                        .members
                        .iter()
                        .filter(|&&(id, in_a, in_b)| (in_a && val(id, pa) != v) || (in_b && val(id, qb) != v))
                        .map(|m| m.0)
                        .collect();
                    best = (total - k, ids);
                }
            }
            best
        };
        out.cost += best.0;
        out.deleted.extend(best.1);
    }
    out.deleted.sort_unstable();
    out.deleted.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_constraints;
    use crate::model::{Fact, Schema, ValueKind};

    fn schema() -> Schema {
        let mut s = Schema::single("R", &["A", "B"], ValueKind::Text);
        s.merge(&Schema::single("S", &["A", "B"], ValueKind::Text)).unwrap();
        s
    }

    fn dc(body: &str) -> DenialConstraint {
        parse_constraints(&format!("DC e: {body}"), &schema())
            .unwrap()
            .iter()
            .next()
            .unwrap()
            .clone()
    }

    #[test]
    fn named_forms_classify() {
        // σ1: R(x,y), R(x,z) ⇒ y = z
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.A = s.A, t.B != s.B")),
            EgdShape::SelfJoinSpecial(SpecialForm::CommonFirst)
        );
        // σ2: R(x,y), R(y,z) ⇒ x = z
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.B = s.A, t.A != s.B")),
            EgdShape::SelfJoinChainHard { i: 1, j: 3 }
        );
        // σ3: R(x,y), R(y,z) ⇒ x = y
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.B = s.A, t.A != t.B")),
            EgdShape::SelfJoinChainHard { i: 1, j: 2 }
        );
        // σ4: R(x,y), S(y,z) ⇒ x = z
        assert_eq!(
            classify_egd(&dc("t in R, s in S | t.B = s.A, t.A != s.B")),
            EgdShape::TwoRelationShape
        );
    }

    #[test]
    fn reversed_chain_is_renumbered() {
        // R(x2,x3), R(x1,x2) ⇒ x1 = x3, written with the atoms swapped
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.A = s.B, s.A != t.B")),
            EgdShape::SelfJoinChainHard { i: 1, j: 3 }
        );
    }

    #[test]
    fn other_shapes() {
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.A = s.B, t.B = s.A, t.A != t.B")),
            EgdShape::SelfJoinSpecial(SpecialForm::SwappedPair)
        );
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.A = s.A, t.B = s.B, t.A != t.B")),
            EgdShape::SelfJoinSpecial(SpecialForm::RepeatedAtom)
        );
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.A != s.B")),
            EgdShape::SingleRelNoShareShape
        );
        assert_eq!(
            classify_egd(&dc("t in R, s in R | t.B = s.A, s.A = s.B, t.A != s.B")),
            EgdShape::SelfJoinSpecial(SpecialForm::Loop)
        );
        assert_eq!(classify_egd(&dc("t in R, s in R | t.A = \"x\", t.B != s.B")), EgdShape::NotAnEgd);
        assert_eq!(classify_egd(&dc("t in R, s in R | t.A = s.A, t.A != s.A")), EgdShape::NotAnEgd);
        assert_eq!(classify_egd(&dc("t in R | t.A != t.B")), EgdShape::NotAnEgd);
    }

    fn db(rows: &[(&str, &str, &str)], costs: &[f64]) -> Database {
        let mut d = Database::new(schema());
        for (i, (r, a, b)) in rows.iter().enumerate() {
            let id = RecordId(i as u64);
            d.insert(id, Fact::new(*r, vec![Value::text(*a), Value::text(*b)])).unwrap();
            if let Some(c) = costs.get(i) {
                d.set_cost(id, *c).unwrap();
            }
        }
        d
    }

    #[test]
    fn fd_block_needs_one_deletion() {
        let d = db(&[("R", "0", "1"), ("R", "0", "2"), ("R", "1", "1")], &[]);
        let r = egd_min_repair(&d, &dc("t in R, s in R | t.A = s.A, t.B != s.B"), |id| d.cost_of(id)).unwrap();
        assert_eq!(r.cost, 1.0);
    }

    #[test]
    fn swapped_pair_drops_the_cheaper_fact() {
        let d = db(&[("R", "1", "2"), ("R", "2", "1")], &[5.0, 1.0]);
        let sigma = dc("t in R, s in R | t.A = s.B, t.B = s.A, t.A != t.B");
        let r = egd_min_repair(&d, &sigma, |id| d.cost_of(id)).unwrap();
        assert_eq!(r.cost, 1.0);
        assert_eq!(r.deleted, vec![RecordId(1)]);
    }

    #[test]
    fn hard_shape_is_refused() {
        let d = db(&[], &[]);
        let sigma = dc("t in R, s in R | t.B = s.A, t.A != s.B");
        assert!(matches!(
            egd_min_repair(&d, &sigma, |_| 1.0),
            Err(MeasureError::NotTractable { .. })
        ));
    }
}
