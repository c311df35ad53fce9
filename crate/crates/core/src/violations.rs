//! Constraint evaluation, minimal inconsistent subsets, conflict hypergraphs and
//! maximal consistent subsets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::constraints::{CmpOp, ConstraintSet, DenialConstraint, Predicate, Term};
use crate::error::EngineError;
use crate::model::{Database, Fact, RecordId, Value};

/// A minimal inconsistent subset with one constraint it violates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MiSubset {
    pub ids: Vec<RecordId>,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictHypergraph {
    pub vertices: Vec<RecordId>,
    pub edges: Vec<MiSubset>,
    pub pairwise_only: bool,
}

/// Caps for maximal-consistent-subset enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McLimits {
    /// Stop after this many subsets.
    pub limit: usize,
    /// Largest connected group of conflicting facts searched exhaustively when
    /// some minimal inconsistent subset has three or more facts.
    pub hyper_cap: usize,
}

impl Default for McLimits {
    fn default() -> Self {
        McLimits {
            limit: 1_000_000,
            hyper_cap: 20,
        }
    }
}

fn check_schema(db: &Database, sigma: &ConstraintSet) -> Result<(), EngineError> {
    sigma.check_schema(db.schema()).map_err(EngineError::SchemaMismatch)
}

// ---------------------------------------------------------------------------
// Join evaluation

struct Rel<'a> {
    rows: Vec<(RecordId, &'a Fact)>,
}

/// Rows per relation plus lazily built equality indexes.
struct Tables<'a> {
    rels: HashMap<&'a str, Rel<'a>>,
    indexes: HashMap<(String, usize), HashMap<&'a Value, Vec<usize>>>,
}

impl<'a> Tables<'a> {
    fn new(db: &'a Database) -> Self {
        let mut rels: HashMap<&'a str, Rel<'a>> = HashMap::new();
        for (id, f) in db.iter() {
            rels.entry(f.relation.as_str())
                .or_insert_with(|| Rel { rows: Vec::new() })
                .rows
                .push((id, f));
        }
        Tables {
            rels,
            indexes: HashMap::new(),
        }
    }

    fn rows(&self, rel: &str) -> &[(RecordId, &'a Fact)] {
        self.rels.get(rel).map_or(&[], |r| &r.rows)
    }

    fn ensure_index(&mut self, rel: &str, pos: usize) {
        let key = (rel.to_owned(), pos);
        if self.indexes.contains_key(&key) {
            return;
        }
        let mut idx: HashMap<&'a Value, Vec<usize>> = HashMap::new();
        if let Some(r) = self.rels.get(rel) {
            for (i, (_, f)) in r.rows.iter().enumerate() {
                idx.entry(&f.values[pos]).or_default().push(i);
            }
        }
        self.indexes.insert(key, idx);
    }
}

/// How candidates for one tuple variable are produced.
enum Source {
    Scan,
    /// Equality with an attribute of an earlier variable.
    Join { pos: usize, var: usize, other_pos: usize },
    /// Equality with a constant.
    Lookup { pos: usize, value: Value },
}

struct Plan<'c> {
    sources: Vec<Source>,
    /// Predicates to check once variable `k` is bound.
    checks: Vec<Vec<&'c Predicate>>,
    /// A predicate without variables that is false.
    dead: bool,
}

fn plan(dc: &DenialConstraint) -> Plan<'_> {
    let n = dc.vars.len();
    let mut checks: Vec<Vec<&Predicate>> = vec![Vec::new(); n];
    let mut dead = false;
    for p in &dc.predicates {
        match p.last_var() {
            Some(k) => checks[k].push(p),
            None => {
                if !p.holds(&[]) {
                    dead = true;
                }
            }
        }
    }
    let sources = (0..n)
        .map(|k| {
            let mut lookup = None;
            for p in &dc.predicates {
                if p.op != CmpOp::Eq {
                    continue;
                }
                for (a, b) in [(&p.lhs, &p.rhs), (&p.rhs, &p.lhs)] {
                    if let Term::Attr { var, pos, .. } = a {
                        if *var != k {
                            continue;
                        }
                        match b {
                            Term::Attr {
                                var: other,
                                pos: other_pos,
                                ..
                            } if *other < k => {
                                return Source::Join {
                                    pos: *pos,
                                    var: *other,
                                    other_pos: *other_pos,
                                }
                            }
                            Term::Const(v) if lookup.is_none() => {
                                lookup = Some(Source::Lookup {
                                    pos: *pos,
                                    value: v.clone(),
                                })
                            }
                            _ => {}
                        }
                    }
                }
            }
            lookup.unwrap_or(Source::Scan)
        })
        .collect();
    Plan { sources, checks, dead }
}

/// Calls `visit` with the id of every fact assigned to each variable, for every
/// assignment that satisfies all predicates of `dc`.
fn for_each_violation<'a>(
    tables: &mut Tables<'a>,
    dc: &DenialConstraint,
    visit: &mut dyn FnMut(&[RecordId]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let plan = plan(dc);
    if plan.dead || dc.vars.is_empty() {
        return ControlFlow::Continue(());
    }
    for (k, src) in plan.sources.iter().enumerate() {
        match src {
            Source::Join { pos, .. } | Source::Lookup { pos, .. } => {
                tables.ensure_index(&dc.vars[k].relation, *pos)
            }
            Source::Scan => {}
        }
    }
    let tables: &Tables<'a> = tables;
    let mut facts: Vec<&Fact> = Vec::with_capacity(dc.vars.len());
    let mut ids: Vec<RecordId> = Vec::with_capacity(dc.vars.len());
    search(tables, dc, &plan, &mut facts, &mut ids, visit)
}

fn search<'a>(
    tables: &Tables<'a>,
    dc: &DenialConstraint,
    plan: &Plan<'_>,
    facts: &mut Vec<&'a Fact>,
    ids: &mut Vec<RecordId>,
    visit: &mut dyn FnMut(&[RecordId]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let k = facts.len();
    if k == dc.vars.len() {
        return visit(ids);
    }
    let rel = dc.vars[k].relation.as_str();
    let rows = tables.rows(rel);
    let mut try_row = |i: usize, facts: &mut Vec<&'a Fact>, ids: &mut Vec<RecordId>| {
        let (id, f) = rows[i];
        facts.push(f);
        ids.push(id);
        let ok = plan.checks[k].iter().all(|p| p.holds(facts));
        let flow = if ok {
            search(tables, dc, plan, facts, ids, visit)
        } else {
            ControlFlow::Continue(())
        };
        facts.pop();
        ids.pop();
        flow
    };
    match &plan.sources[k] {
        Source::Scan => {
            for i in 0..rows.len() {
                try_row(i, facts, ids)?;
            }
        }
        Source::Join { pos, var, other_pos } => {
            let v = &facts[*var].values[*other_pos];
            let idx = &tables.indexes[&(rel.to_owned(), *pos)];
            if let Some(hits) = idx.get(v) {
                for &i in hits {
                    try_row(i, facts, ids)?;
                }
            }
        }
        Source::Lookup { pos, value } => {
            let idx = &tables.indexes[&(rel.to_owned(), *pos)];
            if let Some(hits) = idx.get(value) {
                for &i in hits {
                    try_row(i, facts, ids)?;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

fn distinct_sorted(ids: &[RecordId]) -> Vec<RecordId> {
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// True when no constraint has a violating assignment.
pub fn satisfies(db: &Database, sigma: &ConstraintSet) -> Result<bool, EngineError> {
    check_schema(db, sigma)?;
    let mut tables = Tables::new(db);
    for dc in sigma {
        if for_each_violation(&mut tables, dc, &mut |_| ControlFlow::Break(())).is_break() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether a single constraint is violated.
pub fn violates(db: &Database, dc: &DenialConstraint) -> bool {
    let mut tables = Tables::new(db);
    for_each_violation(&mut tables, dc, &mut |_| ControlFlow::Break(())).is_break()
}

/// Distinct-fact sets of all violating assignments of each constraint, with the
/// smallest label that produces each set.
fn violating_sets(db: &Database, sigma: &ConstraintSet) -> HashMap<Vec<RecordId>, String> {
    let mut tables = Tables::new(db);
    let mut out: HashMap<Vec<RecordId>, String> = HashMap::new();
    for dc in sigma {
        let _ = for_each_violation(&mut tables, dc, &mut |ids| {
            let set = distinct_sorted(ids);
            match out.get_mut(&set) {
                Some(label) if *label <= dc.label => {}
                Some(label) => *label = dc.label.clone(),
                None => {
                    out.insert(set, dc.label.clone());
                }
            }
            ControlFlow::Continue(())
        });
    }
    out
}

/// Keeps the sets none of whose proper subsets is also a candidate.
fn minimal_sets<V: Clone>(candidates: &HashMap<Vec<RecordId>, V>) -> Vec<(Vec<RecordId>, V)> {
    let singles: BTreeSet<RecordId> = candidates.keys().filter(|s| s.len() == 1).map(|s| s[0]).collect();
    let mut out = Vec::new();
    let mut sub = Vec::new();
    for (set, v) in candidates {
        let minimal = match set.len() {
            0 | 1 => true,
            2 => !singles.contains(&set[0]) && !singles.contains(&set[1]),
            n if n < 31 => {
                let full = (1u32 << n) - 1;
                (1..full).all(|mask| {
                    sub.clear();
                    sub.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| set[i]));
                    !candidates.contains_key(&sub)
                })
            }
            _ => candidates
                .keys()
                .all(|other| other.len() >= set.len() || !other.iter().all(|x| set.binary_search(x).is_ok())),
        };
        if minimal {
            out.push((set.clone(), v.clone()));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// All minimal inconsistent subsets, sorted by id set.
pub fn enumerate_mi(db: &Database, sigma: &ConstraintSet) -> Result<Vec<MiSubset>, EngineError> {
    check_schema(db, sigma)?;
    let candidates = violating_sets(db, sigma);
    Ok(minimal_sets(&candidates)
        .into_iter()
        .map(|(ids, witness)| MiSubset { ids, witness })
        .collect())
}

/// Facts that violate the constraints on their own.
pub fn self_inconsistencies(db: &Database, sigma: &ConstraintSet) -> Result<BTreeSet<RecordId>, EngineError> {
    Ok(enumerate_mi(db, sigma)?
        .into_iter()
        .filter(|m| m.ids.len() == 1)
        .map(|m| m.ids[0])
        .collect())
}

/// Minimal violations `(F, group)`: `F` violates some constraint of the group and
/// no proper subset of `F` does. Constraints expanded from one FD form one group.
pub fn minimal_violations(db: &Database, sigma: &ConstraintSet) -> Result<Vec<(Vec<RecordId>, String)>, EngineError> {
    check_schema(db, sigma)?;
    let mut groups: BTreeMap<&str, Vec<DenialConstraint>> = BTreeMap::new();
    for dc in sigma {
        groups.entry(dc.group()).or_default().push(dc.clone());
    }
    let mut out = Vec::new();
    for (group, dcs) in groups {
        let cs = ConstraintSet::new(dcs).expect("labels are distinct within a set");
        let candidates = violating_sets(db, &cs);
        out.extend(minimal_sets(&candidates).into_iter().map(|(ids, _)| (ids, group.to_owned())));
    }
    out.sort();
    Ok(out)
}

pub fn conflict_hypergraph(db: &Database, sigma: &ConstraintSet) -> Result<ConflictHypergraph, EngineError> {
    let edges = enumerate_mi(db, sigma)?;
    Ok(ConflictHypergraph {
        vertices: db.ids().collect(),
        pairwise_only: edges.iter().all(|e| e.ids.len() <= 2),
        edges,
    })
}

impl ConflictHypergraph {
    /// `{"vertices": [...], "edges": [[...]], "witnesses": [...]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().map(|v| v.0).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| e.ids.iter().map(|v| v.0).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "witnesses": self.edges.iter().map(|e| e.witness.clone()).collect::<Vec<_>>(),
        })
    }

    /// Edge-list text: `p edge n m`, then `c v <index> <id>` lines mapping 1-based
    /// vertex numbers to record ids, then `e u v` per edge. Size-1 edges are
    /// written as comments. Returns `None` when some edge has more than two facts.
    pub fn to_dimacs(&self) -> Option<String> {
        if !self.pairwise_only {
            return None;
        }
        let index: HashMap<RecordId, usize> = self.vertices.iter().enumerate().map(|(i, v)| (*v, i + 1)).collect();
        let pairs: Vec<&MiSubset> = self.edges.iter().filter(|e| e.ids.len() == 2).collect();
        let mut out = String::new();
        writeln!(out, "p edge {} {}", self.vertices.len(), pairs.len()).unwrap();
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "c v {} {}", i + 1, v).unwrap();
        }
        for e in &self.edges {
            if e.ids.len() == 1 {
                writeln!(out, "c self {}", index[&e.ids[0]]).unwrap();
            }
        }
        for e in pairs {
            writeln!(out, "e {} {}", index[&e.ids[0]], index[&e.ids[1]]).unwrap();
        }
        Some(out)
    }

    pub fn self_inconsistent(&self) -> BTreeSet<RecordId> {
        self.edges.iter().filter(|e| e.ids.len() == 1).map(|e| e.ids[0]).collect()
    }

    pub fn problematic(&self) -> BTreeSet<RecordId> {
        self.edges.iter().flat_map(|e| e.ids.iter().copied()).collect()
    }
}

// ---------------------------------------------------------------------------
// Maximal consistent subsets

/// Connected groups of conflicting facts that are not self-inconsistent, with the
/// edges (as local index lists) inside each group.
struct Components {
    always: Vec<RecordId>,
    parts: Vec<(Vec<RecordId>, Vec<Vec<usize>>)>,
}

fn components(graph: &ConflictHypergraph) -> Components {
    let bad = graph.self_inconsistent();
    let problematic = graph.problematic();
    let always: Vec<RecordId> = graph
        .vertices
        .iter()
        .copied()
        .filter(|v| !problematic.contains(v))
        .collect();
    let verts: Vec<RecordId> = problematic.iter().copied().filter(|v| !bad.contains(v)).collect();
    let pos: HashMap<RecordId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let edges: Vec<Vec<usize>> = graph
        .edges
        .iter()
        .filter(|e| e.ids.len() >= 2)
        .map(|e| e.ids.iter().map(|v| pos[v]).collect())
        .collect();
    for e in &edges {
        for w in e.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..verts.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut local = vec![0usize; verts.len()];
    let mut edge_lists: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for members in groups.values() {
        for (j, &i) in members.iter().enumerate() {
            local[i] = j;
        }
    }
    for e in &edges {
        let r = find(&mut parent, e[0]);
        edge_lists.entry(r).or_default().push(e.iter().map(|&i| local[i]).collect());
    }
    let parts = groups
        .into_iter()
        .map(|(r, members)| {
            (
                members.iter().map(|&i| verts[i]).collect(),
                edge_lists.remove(&r).unwrap_or_default(),
            )
        })
        .collect();
    Components { always, parts }
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}
fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}
fn bit_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}
fn bits_empty(b: &Bits) -> bool {
    b.iter().all(|w| *w == 0)
}
fn bits_and(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}
fn bits_count(b: &Bits) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}
fn bits_iter(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let t = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + t)
        })
    })
}

/// Maximal independent sets of a graph, as maximal cliques of its complement
/// (Bron-Kerbosch with Tomita pivoting). Returns `Err(found)` past `limit`.
fn maximal_independent_sets(n: usize, edges: &[Vec<usize>], limit: usize) -> Result<Vec<Vec<usize>>, usize> {
    let mut comp: Vec<Bits> = (0..n)
        .map(|i| {
            let mut b = bits_new(n);
            for j in 0..n {
                if j != i {
                    bit_set(&mut b, j);
                }
            }
            b
        })
        .collect();
    for e in edges {
        let (a, b) = (e[0], e[1]);
        comp[a][b / 64] &= !(1 << (b % 64));
        comp[b][a / 64] &= !(1 << (a % 64));
    }
    let mut all = bits_new(n);
    for i in 0..n {
        bit_set(&mut all, i);
    }
    let mut out = Vec::new();
    let mut r = Vec::new();
    fn bk(
        comp: &[Bits],
        r: &mut Vec<usize>,
        p: Bits,
        mut x: Bits,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<(), usize> {
        if bits_empty(&p) && bits_empty(&x) {
            if out.len() >= limit {
                return Err(out.len());
            }
            let mut set = r.clone();
            set.sort_unstable();
            out.push(set);
            return Ok(());
        }
        // pivot: vertex of P ∪ X with most neighbours in P
        let pivot = bits_iter(&p)
            .chain(bits_iter(&x))
            .max_by_key(|&u| (bits_count(&bits_and(&p, &comp[u])), std::cmp::Reverse(u)))
            .expect("P ∪ X is non-empty");
        let candidates: Vec<usize> = bits_iter(&p).filter(|&v| !bit_get(&comp[pivot], v)).collect();
        let mut p = p;
        for v in candidates {
            r.push(v);
            bk(comp, r, bits_and(&p, &comp[v]), bits_and(&x, &comp[v]), out, limit)?;
            r.pop();
            p[v / 64] &= !(1 << (v % 64));
            bit_set(&mut x, v);
        }
        Ok(())
    }
    bk(&comp, &mut r, all, bits_new(n), &mut out, limit)?;
    out.sort();
    Ok(out)
}

/// Maximal sets containing no hyperedge entirely, by exhaustive search (n ≤ 64).
fn maximal_hyper_independent(n: usize, edges: &[Vec<usize>], limit: usize) -> Result<Vec<Vec<usize>>, usize> {
    let masks: Vec<u64> = edges
        .iter()
        .map(|e| e.iter().fold(0u64, |m, &i| m | 1 << i))
        .collect();
    let mut by_vertex: Vec<Vec<u64>> = vec![Vec::new(); n];
    for &m in &masks {
        for (i, list) in by_vertex.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                list.push(m);
            }
        }
    }
    let blocked = |chosen: u64, v: usize| by_vertex[v].iter().any(|&e| e & !(chosen | 1 << v) == 0);
    let mut out = Vec::new();
    fn go(
        i: usize,
        n: usize,
        chosen: u64,
        blocked: &dyn Fn(u64, usize) -> bool,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<(), usize> {
        if i == n {
            let maximal = (0..n).all(|v| chosen >> v & 1 == 1 || blocked(chosen, v));
            if maximal {
                if out.len() >= limit {
                    return Err(out.len());
                }
                out.push((0..n).filter(|v| chosen >> v & 1 == 1).collect());
            }
            return Ok(());
        }
        if !blocked(chosen, i) {
            go(i + 1, n, chosen | 1 << i, blocked, out, limit)?;
        }
        go(i + 1, n, chosen, blocked, out, limit)
    }
    go(0, n, 0, &blocked, &mut out, limit)?;
    Ok(out)
}

fn component_sets(
    verts: &[RecordId],
    edges: &[Vec<usize>],
    limits: McLimits,
) -> Result<Vec<Vec<usize>>, EngineError> {
    let pairwise = edges.iter().all(|e| e.len() == 2);
    let res = if pairwise {
        maximal_independent_sets(verts.len(), edges, limits.limit)
    } else {
        if verts.len() > limits.hyper_cap.min(64) {
            return Err(EngineError::CapExceeded {
                vertices: verts.len(),
                cap: limits.hyper_cap,
            });
        }
        maximal_hyper_independent(verts.len(), edges, limits.limit)
    };
    res.map_err(|found| EngineError::LimitExceeded {
        found,
        limit: limits.limit,
    })
}

/// Lists every maximal consistent subset (each sorted, list sorted).
pub fn maximal_consistent_subsets(
    db: &Database,
    sigma: &ConstraintSet,
    limits: McLimits,
) -> Result<Vec<Vec<RecordId>>, EngineError> {
    let graph = conflict_hypergraph(db, sigma)?;
    let comps = components(&graph);
    let mut acc: Vec<Vec<RecordId>> = vec![comps.always.clone()];
    for (verts, edges) in &comps.parts {
        let sets = component_sets(verts, edges, limits)?;
        if acc.len().saturating_mul(sets.len()) > limits.limit {
            return Err(EngineError::LimitExceeded {
                found: acc.len().saturating_mul(sets.len()),
                limit: limits.limit,
            });
        }
        let mut next = Vec::with_capacity(acc.len() * sets.len());
        for base in &acc {
            for s in &sets {
                let mut v = base.clone();
                v.extend(s.iter().map(|&i| verts[i]));
                next.push(v);
            }
        }
        acc = next;
    }
    for s in &mut acc {
        s.sort_unstable();
    }
    acc.sort();
    Ok(acc)
}

/// Number of maximal consistent subsets, multiplied out over independent groups
/// of conflicting facts. `exact` is false when some group hit a cap, in which case
/// `count` is a lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCount {
    pub count: f64,
    pub exact: bool,
}

pub fn count_maximal_consistent(graph: &ConflictHypergraph, limits: McLimits) -> McCount {
    let comps = components(graph);
    let mut count = 1.0f64;
    let mut exact = true;
    for (verts, edges) in &comps.parts {
        match component_sets(verts, edges, limits) {
            Ok(sets) => count *= sets.len() as f64,
            Err(EngineError::LimitExceeded { found, .. }) => {
                count *= found.max(1) as f64;
                exact = false;
            }
            Err(_) => {
                // a group of k conflicting facts has at least one maximal subset
                exact = false;
            }
        }
    }
    if count > 9_007_199_254_740_992.0 {
        exact = false;
    }
    McCount { count, exact }
}
