//! Instances encoding MaxCut as a minimum repair under the chained self-join EGD.

use serde::{Deserialize, Serialize};

use crate::constraints::{parse_constraints, DenialConstraint};
use crate::error::NoiseError;
use crate::model::{Database, Fact, Schema, Value, ValueKind};
use crate::repair::CostModel;

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Normalises edges to `(min, max)`, sorted and deduplicated; rejects self-loops.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, NoiseError> {
        let mut out = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(NoiseError::Graph(format!("self-loop on vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(NoiseError::Graph(format!("edge {u} {v} leaves the vertex range 0..{n}")));
            }
            out.push((u.min(v), u.max(v)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Graph { n, edges: out })
    }

    /// Edge-list text: one `u v` pair per line (0-based); an optional
    /// `vertices N` line declares isolated vertices. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, NoiseError> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| NoiseError::Graph(format!("line {}: `{s}` is not a vertex number", i + 1)))
            };
            match parts.as_slice() {
                ["vertices", n] => declared = Some(num(n)?),
                [u, v] => edges.push((num(u)?, num(v)?)),
                _ => return Err(NoiseError::Graph(format!("line {}: expected `u v`", i + 1))),
            }
        }
        let seen = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = declared.unwrap_or(seen.max(1));
        Graph::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vertices {}\n", self.n);
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("simple")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|v| (v - 1, v))).expect("simple")
    }
}

/// Size of a maximum cut, by enumerating every bipartition (vertex 0 fixed on one side).
pub fn brute_force_maxcut(g: &Graph) -> usize {
    assert!(g.n <= 30, "exhaustive cut enumeration is limited to 30 vertices");
    if g.n <= 1 {
        return 0;
    }
    (0u64..1 << (g.n - 1))
        .map(|mask| {
            let side = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
            g.edges.iter().filter(|&&(u, v)| side(u) != side(v)).count()
        })
        .max()
        .unwrap_or(0)
}

/// Minimum repair cost the reduction predicts: `(m+1)·n + 2m − MaxCut`.
pub fn predicted_repair_cost(g: &Graph) -> f64 {
    let (n, m) = (g.n as f64, g.edges.len() as f64);
    (m + 1.0) * n + 2.0 * m - brute_force_maxcut(g) as f64
}

pub const MAXCUT_CONSTRAINT: &str = "DC chain: t in R, s in R | t.B = s.A, t.A != s.B";

/// Facts `R(1,v)` and `R(v,2)` per vertex (cost m+1) and `R(u,v)`, `R(v,u)` per
/// edge (cost 1), with the constraint `R(x1,x2), R(x2,x3) ⇒ x1 = x3`.
pub fn maxcut_instance(g: &Graph) -> Result<(Database, DenialConstraint, CostModel), NoiseError> {
    let g = Graph::new(g.n, g.edges.iter().copied())?;
    if g.n == 0 {
        return Err(NoiseError::Graph("the graph needs at least one vertex".into()));
    }
    let schema = Schema::single("R", &["A", "B"], ValueKind::Text);
    let mut db = Database::new(schema);
    let name = |v: usize| Value::text(format!("v{v}"));
    let heavy = g.edges.len() as f64 + 1.0;
    for v in 0..g.n {
        for vals in [vec![Value::text("1"), name(v)], vec![name(v), Value::text("2")]] {
            let id = db.push(Fact::new("R", vals)).expect("schema fits");
            db.set_cost(id, heavy).expect("positive");
        }
    }
    for &(u, v) in &g.edges {
        for vals in [vec![name(v), name(u)], vec![name(u), name(v)]] {
            let id = db.push(Fact::new("R", vals)).expect("schema fits");
            db.set_cost(id, 1.0).expect("positive");
        }
    }
    let sigma = parse_constraints(MAXCUT_CONSTRAINT, db.schema())
        .expect("fixed constraint parses")
        .iter()
        .next()
        .expect("one constraint")
        .clone();
    Ok((db, sigma, CostModel::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egd::{classify_egd, EgdShape};

    #[test]
    fn known_cuts() {
        assert_eq!(brute_force_maxcut(&Graph::complete(3)), 2);
        assert_eq!(brute_force_maxcut(&Graph::path(2)), 1);
        assert_eq!(brute_force_maxcut(&Graph::complete(4)), 4);
        assert_eq!(predicted_repair_cost(&Graph::complete(3)), 16.0);
        assert_eq!(predicted_repair_cost(&Graph::path(2)), 5.0);
        assert_eq!(predicted_repair_cost(&Graph::new(1, []).unwrap()), 1.0);
    }

    #[test]
    fn instance_shape() {
        let (db, sigma, _) = maxcut_instance(&Graph::complete(3)).unwrap();
        assert_eq!(db.len(), 12);
        assert!(matches!(classify_egd(&sigma), EgdShape::SelfJoinChainHard { .. }));
        assert!(Graph::new(2, [(1, 1)]).is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::parse("# triangle\n0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        let g = Graph::parse("vertices 4\n0 1\n").unwrap();
        assert_eq!(g.n, 4);
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
        assert!(Graph::parse("0 x").is_err());
    }
}
