//! Covering programs `min c·x  s.t.  Σ_{i∈row} x_i ≥ 1,  0 ≤ x ≤ 1`: a
//! bounded-variable primal simplex for the relaxation and depth-first
//! branch-and-bound for the 0/1 version.
//!
//! Both solvers split the program into connected components first. Programs
//! whose rows all have at most two variables (weighted vertex cover) are solved
//! by a max-flow on the bipartite double cover, which yields a half-integral
//! optimum; [`solve_lp_simplex`] forces the simplex path.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::model::RecordId;
use crate::violations::MiSubset;

pub const FEAS_TOL: f64 = 1e-7;
pub const INT_TOL: f64 = 1e-6;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    /// Each row is a set of variable indices whose sum must be at least 1.
    pub rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub assignment: Vec<f64>,
    /// Simplex pivots and bound flips (or augmenting paths on the flow path).
    pub iterations: usize,
    /// Branch-and-bound nodes explored (0 for the relaxation).
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpOptions {
    pub node_budget: usize,
}

impl Default for IlpOptions {
    fn default() -> Self {
        IlpOptions { node_budget: 1_000_000 }
    }
}

impl LinearProgram {
    /// Builds a program, normalising rows (sorted, deduplicated) and checking invariants.
    pub fn new(num_vars: usize, objective: Vec<f64>, rows: Vec<Vec<usize>>) -> Result<Self, SolverError> {
        if objective.len() != num_vars {
            return Err(SolverError::Malformed(format!(
                "{} costs for {num_vars} variables",
                objective.len()
            )));
        }
        if let Some(c) = objective.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(SolverError::Malformed(format!("cost {c} is not a finite non-negative number")));
        }
        let mut norm = Vec::with_capacity(rows.len());
        for (i, mut r) in rows.into_iter().enumerate() {
            r.sort_unstable();
            r.dedup();
            if r.is_empty() {
                return Err(SolverError::Malformed(format!("row {i} is empty")));
            }
            if let Some(v) = r.iter().find(|v| **v >= num_vars) {
                return Err(SolverError::Malformed(format!("row {i} mentions variable {v}")));
            }
            norm.push(r);
        }
        Ok(LinearProgram {
            num_vars,
            objective,
            rows: norm,
        })
    }

    pub fn max_row_len(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `min c0 c1 ...` followed by one `row i j ...` line per covering row.
    pub fn to_text(&self) -> String {
        let mut out = String::from("min");
        for c in &self.objective {
            write!(out, " {c}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str("row");
            for v in r {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SolverError> {
        let mut objective = None;
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let bad = |m: &str| SolverError::Malformed(format!("line {}: {m}", n + 1));
            match parts.next() {
                None => continue,
                Some("min") => {
                    let cs: Result<Vec<f64>, _> = parts.map(str::parse).collect();
                    objective = Some(cs.map_err(|_| bad("bad cost"))?);
                }
                Some("row") => {
                    let r: Result<Vec<usize>, _> = parts.map(str::parse).collect();
                    rows.push(r.map_err(|_| bad("bad variable index"))?);
                }
                Some(_) => return Err(bad("expected `min` or `row`")),
            }
        }
        let objective = objective.ok_or_else(|| SolverError::Malformed("missing `min` line".into()))?;
        LinearProgram::new(objective.len(), objective, rows)
    }

    fn value_of(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Whether `x` satisfies every row up to the feasibility tolerance.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.iter().all(|v| *v >= -FEAS_TOL && *v <= 1.0 + FEAS_TOL)
            && self.rows.iter().all(|r| r.iter().map(|&i| x[i]).sum::<f64>() >= 1.0 - FEAS_TOL)
    }
}

/// One variable per id (in `ids` order) with its deletion cost; one row per subset.
pub fn build_hitting_set_program(
    mi: &[MiSubset],
    ids: &[RecordId],
    cost: impl Fn(RecordId) -> f64,
) -> Result<LinearProgram, SolverError> {
    let index: std::collections::HashMap<RecordId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let rows = mi
        .iter()
        .map(|m| {
            m.ids
                .iter()
                .map(|id| {
                    index
                        .get(id)
                        .copied()
                        .ok_or_else(|| SolverError::Malformed(format!("subset mentions unknown id {id}")))
                })
                .collect::<Result<Vec<usize>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    LinearProgram::new(ids.len(), ids.iter().map(|id| cost(*id)).collect(), rows)
}

// ---------------------------------------------------------------------------
// Components

struct Component {
    vars: Vec<usize>,
    program: LinearProgram,
}

fn split_components(lp: &LinearProgram) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..lp.num_vars).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for r in &lp.rows {
        for w in r.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut in_row = vec![false; lp.num_vars];
    for r in &lp.rows {
        for &v in r {
            in_row[v] = true;
        }
    }
    let mut comp_of = vec![usize::MAX; lp.num_vars];
    let mut comps: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
    let mut local = vec![0usize; lp.num_vars];
    for v in 0..lp.num_vars {
        if !in_row[v] {
            continue;
        }
        let root = find(&mut parent, v);
        if comp_of[root] == usize::MAX {
            comp_of[root] = comps.len();
            comps.push((Vec::new(), Vec::new()));
        }
        let c = &mut comps[comp_of[root]];
        local[v] = c.0.len();
        c.0.push(v);
    }
    for r in &lp.rows {
        let c = comp_of[find(&mut parent, r[0])];
        comps[c].1.push(r.iter().map(|&v| local[v]).collect());
    }
    comps
        .into_iter()
        .map(|(vars, rows)| {
            let objective = vars.iter().map(|&v| lp.objective[v]).collect();
            Component {
                program: LinearProgram {
                    num_vars: vars.len(),
                    objective,
                    rows,
                },
                vars,
            }
        })
        .collect()
}

fn assemble(lp: &LinearProgram, parts: Vec<(Vec<usize>, LpSolution)>) -> LpSolution {
    let mut x = vec![0.0; lp.num_vars];
    let mut iterations = 0;
    let mut nodes = 0;
    for (vars, sol) in parts {
        for (i, v) in vars.iter().enumerate() {
            x[*v] = sol.assignment[i];
        }
        iterations += sol.iterations;
        nodes += sol.nodes;
    }
    LpSolution {
        status: LpStatus::Optimal,
        value: lp.value_of(&x),
        assignment: x,
        iterations,
        nodes,
    }
}

// ---------------------------------------------------------------------------
// Relaxation

/// Optimum of the relaxation. Deterministic for a fixed program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, SolverError> {
    solve_relaxation(lp, false)
}

/// Optimum of the relaxation, always via the simplex method.
pub fn solve_lp_simplex(lp: &LinearProgram) -> Result<LpSolution, SolverError> {
    solve_relaxation(lp, true)
}

fn solve_relaxation(lp: &LinearProgram, force_simplex: bool) -> Result<LpSolution, SolverError> {
    let mut parts = Vec::new();
    for comp in split_components(lp) {
        let sol = if !force_simplex && comp.program.max_row_len() <= 2 {
            vertex_cover_lp(&comp.program)
        } else {
            simplex(&comp.program)?
        };
        parts.push((comp.vars, sol));
    }
    let sol = assemble(lp, parts);
    if !lp.is_feasible(&sol.assignment) {
        return Err(SolverError::NumericalFailure("relaxation optimum violates a row".into()));
    }
    Ok(sol)
}

#[derive(Clone, Copy, PartialEq)]
enum At {
    Lower,
    Upper,
}

/// Bounded-variable primal simplex on the compact tableau `x_B = β − T x_N`.
///
/// Variables `0..n` are the program's (bounds [0,1]); `n..n+m` are row surpluses
/// (bounds [0,∞)). Starting with every program variable at its upper bound and
/// the surpluses basic gives a feasible basis, so no phase one is needed.
fn simplex(lp: &LinearProgram) -> Result<LpSolution, SolverError> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    let upper = |v: usize| if v < n { 1.0 } else { f64::INFINITY };
    let cost = |v: usize| if v < n { lp.objective[v] } else { 0.0 };

    // tableau m × n, row-major
    let mut t = vec![0.0f64; m * n];
    for (i, r) in lp.rows.iter().enumerate() {
        for &j in r {
            t[i * n + j] = -1.0;
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let mut at: Vec<At> = vec![At::Upper; n];
    let mut xb: Vec<f64> = lp.rows.iter().map(|r| r.len() as f64 - 1.0).collect();
    // reduced costs of nonbasic columns
    let mut d: Vec<f64> = (0..n).map(cost).collect();

    let bland_after = 2 * (n + m);
    let max_iter = 50 * (n + m) + 1000;
    let mut iter = 0usize;
    loop {
        let bland = iter >= bland_after;
        // pricing
        let mut enter: Option<(usize, f64)> = None;
        for k in 0..n {
            let improving = match at[k] {
                At::Lower => d[k] < -FEAS_TOL,
                At::Upper => d[k] > FEAS_TOL,
            };
            if !improving {
                continue;
            }
            match enter {
                None => enter = Some((k, d[k].abs())),
                Some((bk, bv)) => {
                    let better = if bland {
                        nonbasic[k] < nonbasic[bk]
                    } else {
                        d[k].abs() > bv || (d[k].abs() == bv && nonbasic[k] < nonbasic[bk])
                    };
                    if better {
                        enter = Some((k, d[k].abs()));
                    }
                }
            }
        }
        let Some((k, _)) = enter else { break };
        if iter >= max_iter {
            return Err(SolverError::NumericalFailure(format!("no convergence after {iter} iterations")));
        }
        iter += 1;

        let dir = if at[k] == At::Lower { 1.0 } else { -1.0 };
        let ev = nonbasic[k];
        // ratio test; entering moves by dir * step
        let mut step = upper(ev);
        let mut leave: Option<(usize, At)> = None;
        for i in 0..m {
            let alpha = dir * t[i * n + k];
            let bv = basis[i];
            let (limit, bound) = if alpha > PIVOT_TOL {
                (xb[i].max(0.0) / alpha, At::Lower)
            } else if alpha < -PIVOT_TOL && upper(bv).is_finite() {
                ((upper(bv) - xb[i]).max(0.0) / -alpha, At::Upper)
            } else {
                continue;
            };
            let better = match leave {
                None => limit < step,
                Some((li, _)) => limit < step || (limit == step && basis[i] < basis[li]),
            };
            if better {
                step = limit;
                leave = Some((i, bound));
            }
        }
        if !step.is_finite() {
            return Err(SolverError::NumericalFailure("unbounded direction in a covering program".into()));
        }
        for i in 0..m {
            xb[i] -= dir * t[i * n + k] * step;
        }
        let entering_value = if at[k] == At::Lower { 0.0 } else { upper(ev) } + dir * step;
        match leave {
            None => {
                // bound flip
                at[k] = if at[k] == At::Lower { At::Upper } else { At::Lower };
            }
            Some((r, bound)) => {
                let lv = basis[r];
                let p = t[r * n + k];
                basis[r] = ev;
                xb[r] = entering_value;
                nonbasic[k] = lv;
                at[k] = bound;
                // pivot row
                let inv = 1.0 / p;
                for j in 0..n {
                    t[r * n + j] *= inv;
                }
                t[r * n + k] = inv;
                let (before, rest) = t.split_at_mut(r * n);
                let (prow, after) = rest.split_at_mut(n);
                for row in before.chunks_exact_mut(n).chain(after.chunks_exact_mut(n)) {
                    let f = row[k];
                    if f == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        row[j] -= f * prow[j];
                    }
                    row[k] = -f * inv;
                }
                let dk = d[k];
                for j in 0..n {
                    d[j] -= dk * prow[j];
                }
                d[k] = -dk * inv;
            }
        }
    }

    let mut x = vec![0.0; n];
    for k in 0..n {
        if nonbasic[k] < n && at[k] == At::Upper {
            x[nonbasic[k]] = 1.0;
        }
    }
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = xb[i].clamp(0.0, 1.0);
        }
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.value_of(&x),
        assignment: x,
        iterations: iter,
        nodes: 0,
    })
}

/// Weighted vertex cover relaxation via min cut on the bipartite double cover.
/// Rows of size one force their variable to 1.
fn vertex_cover_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars;
    let mut forced = vec![false; n];
    for r in &lp.rows {
        if r.len() == 1 {
            forced[r[0]] = true;
        }
    }
    // nodes: 0 = source, 1 = sink, 2 + v = left copy, 2 + n + v = right copy
    let mut g = FlowGraph::new(2 + 2 * n);
    for v in 0..n {
        if !forced[v] {
            g.add_edge(0, 2 + v, lp.objective[v]);
            g.add_edge(2 + n + v, 1, lp.objective[v]);
        }
    }
    for r in &lp.rows {
        if r.len() == 2 && !forced[r[0]] && !forced[r[1]] {
            let (a, b) = (r[0], r[1]);
            g.add_edge(2 + a, 2 + n + b, f64::INFINITY);
            g.add_edge(2 + b, 2 + n + a, f64::INFINITY);
        }
    }
    let paths = g.max_flow(0, 1);
    let reach = g.reachable(0);
    let x: Vec<f64> = (0..n)
        .map(|v| {
            if forced[v] {
                1.0
            } else {
                let left = if reach[2 + v] { 0.0 } else { 1.0 };
                let right = if reach[2 + n + v] { 1.0 } else { 0.0 };
                (left + right) / 2.0
            }
        })
        .collect();
    LpSolution {
        status: LpStatus::Optimal,
        value: lp.value_of(&x),
        assignment: x,
        iterations: paths,
        nodes: 0,
    }
}

struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, a: usize, b: usize, c: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.head.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > FEAS_TOL * 1e-3 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != usize::MAX).collect()
    }

    /// Dinic's algorithm; returns the number of augmenting paths.
    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut paths = 0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return paths;
            }
            let mut it = vec![0usize; self.head.len()];
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut it);
                if pushed <= 0.0 {
                    break;
                }
                paths += 1;
            }
        }
    }

    fn augment(&mut self, u: usize, t: usize, limit: f64, level: &[usize], it: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while it[u] < self.head[u].len() {
            let e = self.head[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > FEAS_TOL * 1e-3 && level[v] == level[u] + 1 {
                let got = self.augment(v, t, limit.min(self.cap[e]), level, it);
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            it[u] += 1;
        }
        0.0
    }
}

// ---------------------------------------------------------------------------
// Branch and bound

/// Exact 0/1 optimum by depth-first branch-and-bound with LP bounds.
pub fn solve_ilp(lp: &LinearProgram) -> Result<LpSolution, SolverError> {
    solve_ilp_with(lp, IlpOptions::default())
}

pub fn solve_ilp_with(lp: &LinearProgram, opts: IlpOptions) -> Result<LpSolution, SolverError> {
    let mut parts = Vec::new();
    let mut budget = opts.node_budget;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut failed = false;
    for comp in split_components(lp) {
        match branch_and_bound(&comp.program, budget) {
            Ok(sol) => {
                budget = budget.saturating_sub(sol.nodes);
                lower += sol.value;
                upper += sol.value;
                parts.push((comp.vars, sol));
            }
            Err(SolverError::NodeBudgetExceeded {
                lower: lo, upper: up, ..
            }) => {
                failed = true;
                budget = 0;
                lower += lo;
                upper += up;
            }
            Err(e) => return Err(e),
        }
    }
    if failed {
        return Err(SolverError::NodeBudgetExceeded {
            budget: opts.node_budget,
            lower,
            upper,
        });
    }
    let sol = assemble(lp, parts);
    debug_assert!(lp.is_feasible(&sol.assignment));
    Ok(sol)
}

/// Greedy cover (best cost per newly covered row), then drops redundant picks.
fn greedy_cover(lp: &LinearProgram) -> Vec<bool> {
    let n = lp.num_vars;
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in lp.rows.iter().enumerate() {
        for &v in r {
            rows_of[v].push(i);
        }
    }
    let mut covered = vec![false; lp.rows.len()];
    let mut left = lp.rows.len();
    let mut pick = vec![false; n];
    let mut order = Vec::new();
    while left > 0 {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            if pick[v] {
                continue;
            }
            let gain = rows_of[v].iter().filter(|&&i| !covered[i]).count();
            if gain == 0 {
                continue;
            }
            let score = lp.objective[v] / gain as f64;
            if best.is_none_or(|(_, s)| score < s) {
                best = Some((v, score));
            }
        }
        let (v, _) = best.expect("every row is non-empty");
        pick[v] = true;
        order.push(v);
        for &i in &rows_of[v] {
            if !covered[i] {
                covered[i] = true;
                left -= 1;
            }
        }
    }
    for &v in order.iter().rev() {
        let needed = rows_of[v]
            .iter()
            .any(|&i| lp.rows[i].iter().filter(|&&u| pick[u]).count() == 1);
        if !needed {
            pick[v] = false;
        }
    }
    pick
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Fix {
    Free,
    Zero,
    One,
}

/// The program left after fixing some variables, or `None` when a row can no
/// longer be covered. Rows reduced to one free variable force it to 1.
fn reduce(lp: &LinearProgram, fixed: &mut [Fix]) -> Option<(LinearProgram, Vec<usize>, f64)> {
    loop {
        let mut changed = false;
        for r in &lp.rows {
            if r.iter().any(|&v| fixed[v] == Fix::One) {
                continue;
            }
            let mut free = r.iter().filter(|&&v| fixed[v] == Fix::Free);
            match (free.next(), free.next()) {
                (None, _) => return None,
                (Some(&v), None) => {
                    fixed[v] = Fix::One;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let fixed_cost: f64 = (0..lp.num_vars)
        .filter(|&v| fixed[v] == Fix::One)
        .map(|v| lp.objective[v])
        .sum();
    let free: Vec<usize> = (0..lp.num_vars).filter(|&v| fixed[v] == Fix::Free).collect();
    let mut local = vec![usize::MAX; lp.num_vars];
    for (i, &v) in free.iter().enumerate() {
        local[v] = i;
    }
    let rows: Vec<Vec<usize>> = lp
        .rows
        .iter()
        .filter(|r| !r.iter().any(|&v| fixed[v] == Fix::One))
        .map(|r| r.iter().filter(|&&v| fixed[v] == Fix::Free).map(|&v| local[v]).collect())
        .collect();
    let sub = LinearProgram {
        num_vars: free.len(),
        objective: free.iter().map(|&v| lp.objective[v]).collect(),
        rows,
    };
    Some((sub, free, fixed_cost))
}

fn degrees(lp: &LinearProgram) -> Vec<usize> {
    let mut deg = vec![0; lp.num_vars];
    for r in &lp.rows {
        for &v in r {
            deg[v] += 1;
        }
    }
    deg
}

fn branch_and_bound(lp: &LinearProgram, budget: usize) -> Result<LpSolution, SolverError> {
    let n = lp.num_vars;
    let integral_costs = lp.objective.iter().all(|c| c.fract() == 0.0);
    let tighten = |b: f64| if integral_costs { (b - INT_TOL).ceil() } else { b };

    let greedy = greedy_cover(lp);
    let mut best_x: Vec<f64> = greedy.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut best = lp.value_of(&best_x);
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut root_bound = None;

    let mut stack: Vec<Vec<Fix>> = vec![vec![Fix::Free; n]];
    while let Some(mut fixed) = stack.pop() {
        if nodes >= budget {
            return Err(SolverError::NodeBudgetExceeded {
                budget,
                lower: root_bound.unwrap_or(0.0),
                upper: best,
            });
        }
        nodes += 1;
        let Some((sub, free, fixed_cost)) = reduce(lp, &mut fixed) else {
            continue;
        };
        let relax = solve_lp(&sub)?;
        iterations += relax.iterations;
        let bound = tighten(fixed_cost + relax.value);
        if root_bound.is_none() {
            root_bound = Some(bound);
        }
        if bound >= best - FEAS_TOL {
            continue;
        }
        if relax.assignment.iter().all(|x| (x - x.round()).abs() <= INT_TOL) {
            let mut x: Vec<f64> = fixed.iter().map(|&f| if f == Fix::One { 1.0 } else { 0.0 }).collect();
            for (i, &v) in free.iter().enumerate() {
                x[v] = relax.assignment[i].round();
            }
            let value = lp.value_of(&x);
            if value < best - FEAS_TOL {
                best = value;
                best_x = x;
            }
            continue;
        }
        // a half-integral vertex-cover optimum agrees with some integral optimum
        // on its integral coordinates
        let mut kfixed = fixed.clone();
        if sub.max_row_len() <= 2 {
            for (i, &v) in free.iter().enumerate() {
                let x = relax.assignment[i];
                if (x - x.round()).abs() <= INT_TOL {
                    kfixed[v] = if x > 0.5 { Fix::One } else { Fix::Zero };
                }
            }
        }
        let (kernel, kvars, _) = reduce(lp, &mut kfixed).expect("persistent fixing keeps every row coverable");
        if split_components(&kernel).len() != 1 {
            let rest = IlpOptions {
                node_budget: budget.saturating_sub(nodes),
            };
            let sol = solve_ilp_with(&kernel, rest).map_err(|e| match e {
                SolverError::NodeBudgetExceeded { .. } => SolverError::NodeBudgetExceeded {
                    budget,
                    lower: root_bound.unwrap_or(0.0),
                    upper: best,
                },
                e => e,
            })?;
            nodes += sol.nodes;
            iterations += sol.iterations;
            let mut x: Vec<f64> = kfixed.iter().map(|&f| if f == Fix::One { 1.0 } else { 0.0 }).collect();
            for (i, &v) in kvars.iter().enumerate() {
                x[v] = sol.assignment[i];
            }
            let value = lp.value_of(&x);
            if value < best - FEAS_TOL {
                best = value;
                best_x = x;
            }
            continue;
        }
        let mut relaxed = vec![0.0; n];
        for (i, &v) in free.iter().enumerate() {
            relaxed[v] = relax.assignment[i];
        }
        let deg = degrees(&kernel);
        // most fractional, then highest degree, then lowest index
        let i = (0..kernel.num_vars)
            .max_by(|&a, &b| {
                let frac = |i: usize| {
                    let x = relaxed[kvars[i]];
                    (x - x.round()).abs()
                };
                frac(a)
                    .total_cmp(&frac(b))
                    .then(deg[a].cmp(&deg[b]))
                    .then(b.cmp(&a))
            })
            .expect("a connected kernel has variables");
        let v = kvars[i];
        let mut zero = kfixed.clone();
        zero[v] = Fix::Zero;
        kfixed[v] = Fix::One;
        // one-branch is explored first
        stack.push(zero);
        stack.push(kfixed);
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: best,
        assignment: best_x,
        iterations,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(n: usize, rows: &[&[usize]]) -> LinearProgram {
        LinearProgram::new(n, vec![1.0; n], rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_edge() {
        let p = lp(2, &[&[0, 1]]);
        assert!((solve_lp(&p).unwrap().value - 1.0).abs() < 1e-9);
        assert!((solve_lp_simplex(&p).unwrap().value - 1.0).abs() < 1e-9);
        assert_eq!(solve_ilp(&p).unwrap().value, 1.0);
    }

    #[test]
    fn triangle_is_half_integral() {
        let p = lp(3, &[&[0, 1], &[1, 2], &[0, 2]]);
        assert!((solve_lp(&p).unwrap().value - 1.5).abs() < 1e-9);
        assert!((solve_lp_simplex(&p).unwrap().value - 1.5).abs() < 1e-9);
        assert_eq!(solve_ilp(&p).unwrap().value, 2.0);
    }

    #[test]
    fn forced_variable_and_empty_program() {
        let p = LinearProgram::new(4, vec![1.0, 1.0, 1.0, 2.0], vec![vec![3]]).unwrap();
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.value, 2.0);
        assert_eq!(s.assignment[3], 1.0);
        let e = lp(3, &[]);
        assert_eq!(solve_lp(&e).unwrap().value, 0.0);
        assert_eq!(solve_ilp(&e).unwrap().value, 0.0);
    }

    #[test]
    fn hyperedges_use_simplex() {
        let p = lp(4, &[&[0, 1, 2], &[1, 2, 3], &[0, 3]]);
        let s = solve_lp(&p).unwrap();
        assert!(p.is_feasible(&s.assignment));
        assert!((s.value - 1.0).abs() < 1e-9 || s.value > 1.0);
        let i = solve_ilp(&p).unwrap();
        assert!(i.value >= s.value - 1e-9);
        assert!(i.value <= 3.0 * s.value + 1e-9);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        assert!(LinearProgram::new(2, vec![1.0, 1.0], vec![vec![]]).is_err());
        assert!(LinearProgram::new(2, vec![1.0, -1.0], vec![]).is_err());
        assert!(LinearProgram::new(2, vec![1.0, 1.0], vec![vec![2]]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = LinearProgram::new(3, vec![1.0, 2.5, 1.0], vec![vec![0, 1], vec![2]]).unwrap();
        assert_eq!(LinearProgram::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn node_budget_is_reported() {
        // odd cycles force branching
        let p = lp(5, &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[0, 4]]);
        let err = solve_ilp_with(&p, IlpOptions { node_budget: 1 });
        match err {
            Ok(s) => assert_eq!(s.value, 3.0),
            Err(SolverError::NodeBudgetExceeded { lower, upper, .. }) => assert!(lower <= upper),
            Err(e) => panic!("{e}"),
        }
    }
}
