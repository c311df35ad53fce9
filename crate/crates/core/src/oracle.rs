//! Exhaustive reference implementations for small instances.

use crate::constraints::{parse_constraints, DenialConstraint};
use rand::Rng;

use crate::model::{Fact, Schema, Value, ValueKind};
use crate::noise::NoiseRng;
use crate::violations::satisfies;
use crate::{ConstraintSet, Database, RecordId};


/// Every subset of the database's ids as a bit mask over `ids`, with its consistency.
pub struct Subsets {
    pub ids: Vec<RecordId>,
    pub consistent: Vec<bool>,
}

/// Panics beyond 20 facts.
pub fn subsets(db: &Database, sigma: &ConstraintSet) -> Subsets {
    let ids: Vec<RecordId> = db.ids().collect();
    assert!(ids.len() <= 20, "the oracle enumerates every subset");
    let consistent = (0u32..1 << ids.len())
        .map(|mask| {
            let keep: Vec<RecordId> = ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, id)| *id).collect();
            satisfies(&db.restrict(keep.iter()), sigma).expect("constraints fit the schema")
        })
        .collect();
    Subsets { ids, consistent }
}

impl Subsets {
    fn to_ids(&self, mask: u32) -> Vec<RecordId> {
        self.ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, id)| *id).collect()
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn minimal_inconsistent(&self) -> Vec<Vec<RecordId>> {
        let mut out = Vec::new();
        for mask in 0u32..1 << self.n() {
            if self.consistent[mask as usize] {
                continue;
            }
            let minimal = (0..self.n())
                .filter(|i| mask >> i & 1 == 1)
                .all(|i| self.consistent[(mask & !(1 << i)) as usize]);
            if minimal {
                out.push(self.to_ids(mask));
            }
        }
        out.sort();
        out
    }

    pub fn maximal_consistent(&self) -> Vec<Vec<RecordId>> {
        let mut out = Vec::new();
        for mask in 0u32..1 << self.n() {
            if !self.consistent[mask as usize] {
                continue;
            }
            let maximal = (0..self.n())
                .filter(|i| mask >> i & 1 == 0)
                .all(|i| !self.consistent[(mask | 1 << i) as usize]);
            if maximal {
                out.push(self.to_ids(mask));
            }
        }
        out.sort();
        out
    }

    pub fn problematic(&self) -> usize {
        let mut all: Vec<RecordId> = self.minimal_inconsistent().into_iter().flatten().collect();
        all.sort();
        all.dedup();
        all.len()
    }

    /// Cheapest total cost of facts outside a consistent subset.
    pub fn min_deletion(&self, cost: impl Fn(RecordId) -> f64) -> f64 {
        let total: f64 = self.ids.iter().map(|&i| cost(i)).sum();
        (0u32..1 << self.n())
            .filter(|&m| self.consistent[m as usize])
            .map(|m| total - self.to_ids(m).into_iter().map(&cost).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Binary relations `R(A, B)` and `S(A, B)` over numbers.
pub fn egd_schema() -> Schema {
    let mut s = Schema::single("R", &["A", "B"], ValueKind::Numeric);
    s.merge(&Schema::single("S", &["A", "B"], ValueKind::Numeric)).expect("distinct relations");
    s
}

const SLOTS: [&str; 4] = ["t.A", "t.B", "s.A", "s.B"];
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn find(p: &mut [usize; 4], x: usize) -> usize {
    if p[x] != x {
        p[x] = find(p, p[x]);
    }
    p[x]
}

/// Every two-atom EGD over binary relations: a relation pair, a set of slot
/// equalities and one disequality between classes the equalities keep apart.
pub fn binary_egds() -> Vec<(DenialConstraint, bool)> {
    let mut out = Vec::new();
    for rels in [("R", "R"), ("R", "S")] {
        for eqs in 0u32..1 << PAIRS.len() {
            let mut p = [0, 1, 2, 3];
            for (k, &(a, b)) in PAIRS.iter().enumerate() {
                if eqs >> k & 1 == 1 {
                    let (ra, rb) = (find(&mut p, a), find(&mut p, b));
                    p[ra] = rb;
                }
            }
            let class: Vec<usize> = (0..4).map(|i| find(&mut p, i)).collect();
            for &(a, b) in &PAIRS {
                if class[a] == class[b] {
                    continue;
                }
                let mut preds: Vec<String> = PAIRS
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| eqs >> k & 1 == 1)
                    .map(|(_, &(x, y))| format!("{} = {}", SLOTS[x], SLOTS[y]))
                    .collect();
                preds.push(format!("{} != {}", SLOTS[a], SLOTS[b]));
                let text = format!("DC e: t in {}, s in {} | {}", rels.0, rels.1, preds.join(", "));
                let dc = parse_constraints(&text, &egd_schema()).expect("generated constraints parse").iter().next().expect("one constraint").clone();
                // chain: R(x,y), R(y,z) with x, y, z distinct, in either atom order
                let distinct = |i: usize, j: usize| class[i] != class[j];
                let chain = |u: usize, v: usize, w: usize, z: usize| {
                    class[v] == class[w] && distinct(u, v) && distinct(v, z) && distinct(u, z)
                };
                let hard = rels.0 == rels.1 && (chain(0, 1, 2, 3) || chain(2, 3, 0, 1));
                out.push((dc, hard));
            }
        }
    }
    out
}

/// Random facts over [`egd_schema`] with values in `0..domain` and deletion costs 1 to 3.
pub fn random_binary_db(rng: &mut NoiseRng, rows: usize, domain: i64) -> Database {
    let mut db = Database::new(egd_schema());
    for _ in 0..rows {
        let rel = if rng.gen_bool(0.5) { "R" } else { "S" };
        let values = vec![Value::from(rng.gen_range(0..domain)), Value::from(rng.gen_range(0..domain))];
        let id = db.push(Fact::new(rel, values)).expect("fits the schema");
        db.set_cost(id, rng.gen_range(1..=3) as f64).expect("positive");
    }
    db
}
