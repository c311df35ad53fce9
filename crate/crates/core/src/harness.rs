//! Empirical checks of the rationality postulates, random instance generators
//! and the counterexample fixtures.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{parse_constraints, ConstraintSet, DenialConstraint};
use crate::datasets::{airport_constraints, airport_example};
use crate::error::MeasureError;
use crate::measures::{measure, MeasureConfig, MeasureKind};
use crate::model::{Database, Fact, RecordId, Schema, Value, ValueKind};
use crate::noise::rng_from_seed;
use crate::repair::{apply_op, RepairOp};
use crate::violations::{maximal_consistent_subsets, satisfies};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub db: Database,
    pub sigma: ConstraintSet,
}

// ---------------------------------------------------------------------------
// Generators

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdParams {
    pub rows: usize,
    pub attributes: usize,
    pub domain: usize,
    pub fds: usize,
}

impl Default for FdParams {
    fn default() -> Self {
        FdParams {
            rows: 8,
            attributes: 4,
            domain: 3,
            fds: 2,
        }
    }
}

fn attr_names(k: usize) -> Vec<String> {
    (0..k).map(|i| char::from(b'A' + i as u8).to_string()).collect()
}

fn random_rows(rng: &mut impl Rng, schema: Schema, rows: usize, k: usize, v: usize) -> Database {
    let mut db = Database::new(schema);
    for _ in 0..rows {
        let vals = (0..k).map(|_| Value::num(rng.gen_range(0..v) as f64)).collect();
        db.push(Fact::new("R", vals)).expect("fits the schema");
    }
    db
}

fn random_fd_line(rng: &mut impl Rng, names: &[String]) -> String {
    let k = names.len();
    let rhs = rng.gen_range(0..k);
    let others: Vec<usize> = (0..k).filter(|&i| i != rhs).collect();
    let lhs_len = rng.gen_range(1..=others.len().min(2));
    let mut lhs: Vec<usize> = Vec::new();
    while lhs.len() < lhs_len {
        let a = others[rng.gen_range(0..others.len())];
        if !lhs.contains(&a) {
            lhs.push(a);
        }
    }
    lhs.sort_unstable();
    let l: Vec<&str> = lhs.iter().map(|&i| names[i].as_str()).collect();
    format!("FD R: {} -> {}", l.join(", "), names[rhs])
}

/// `rows` facts over `R(A, B, ...)` with values in `0..domain` and `fds` random FDs
/// (one right-hand attribute, one or two on the left).
pub fn random_fd_instance(params: FdParams, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let k = params.attributes.clamp(2, 26);
    let names = attr_names(k);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let schema = Schema::single("R", &refs, ValueKind::Numeric);
    let text: Vec<String> = (0..params.fds.max(1)).map(|_| random_fd_line(&mut rng, &names)).collect();
    let db = random_rows(&mut rng, schema, params.rows, k, params.domain.max(1));
    let sigma = parse_constraints(&text.join("\n"), db.schema()).expect("generated constraints parse");
    Instance {
        name: format!("random-fd(seed={seed})"),
        db,
        sigma,
    }
}

/// A random denial constraint over `R(A, B, C)` drawn from a small template pool:
/// FDs, order-based pair constraints, single-tuple checks and a three-fact chain.
pub fn random_dc_line(rng: &mut impl Rng, label: &str, domain: usize) -> String {
    let names = attr_names(3);
    let pick = |rng: &mut dyn rand::RngCore| names[rng.gen_range(0..3)].clone();
    match rng.gen_range(0..5) {
        0 => random_fd_line(rng, &names),
        1 => {
            let (a, b) = (pick(rng), pick(rng));
            let op = ["<", ">", "!="][rng.gen_range(0..3)];
            let c = pick(rng);
            format!("DC {label}: t in R, s in R | t.{a} = s.{a}, t.{b} {op} s.{b}, t.{c} <= s.{c}")
        }
        2 => {
            let (a, b) = (pick(rng), pick(rng));
            let k = rng.gen_range(0..domain.max(1));
            format!("DC {label}: t in R | t.{a} >= {k}, t.{b} != {}", (k + 1) % domain.max(1))
        }
        3 => {
            let (a, b) = (pick(rng), pick(rng));
            format!("DC {label}: t in R, s in R | t.{a} < s.{a}, t.{b} > s.{b}")
        }
        _ => {
            let (a, b) = (pick(rng), pick(rng));
            format!("DC {label}: t in R, s in R, u in R | t.{a} = s.{a}, s.{a} = u.{a}, t.{b} < s.{b}, s.{b} < u.{b}")
        }
    }
}

/// Up to `rows` facts over `R(A, B, C)` and between one and three random constraints.
pub fn random_dc_instance(rows: usize, domain: usize, seed: u64) -> Instance {
    let mut rng = rng_from_seed(seed);
    let schema = Schema::single("R", &["A", "B", "C"], ValueKind::Numeric);
    let count = rng.gen_range(1..=3);
    let text: Vec<String> = (0..count)
        .map(|i| random_dc_line(&mut rng, &format!("dc{i}"), domain))
        .collect();
    let db = random_rows(&mut rng, schema, rows, 3, domain.max(1));
    let sigma = parse_constraints(&text.join("\n"), db.schema()).expect("generated constraints parse");
    Instance {
        name: format!("random-dc(seed={seed})"),
        db,
        sigma,
    }
}

/// Keeps drawing instances until `count` inconsistent ones are found.
pub fn inconsistent_dc_instances(count: usize, rows: usize, domain: usize, seed: u64) -> Vec<Instance> {
    let mut out = Vec::with_capacity(count);
    let mut s = seed;
    while out.len() < count {
        let inst = random_dc_instance(rows, domain, s);
        s = s.wrapping_add(1);
        if !satisfies(&inst.db, &inst.sigma).expect("generated against its own schema") {
            out.push(inst);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Postulates

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Postulate {
    Positivity,
    Monotonicity,
    Progression,
    Continuity,
    WeightedContinuity,
}

impl std::fmt::Display for Postulate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Postulate::Positivity => "positivity",
            Postulate::Monotonicity => "monotonicity",
            Postulate::Progression => "progression",
            Postulate::Continuity => "continuity",
            Postulate::WeightedContinuity => "weighted-continuity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    HoldsOnSample,
    Violated,
}

/// A self-contained counterexample: the instance, the operation or extra
/// constraint involved, and the measure values observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: String,
    pub database: Database,
    pub constraints: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostulateReport {
    pub postulate: Postulate,
    pub measure: MeasureKind,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub samples: usize,
}

impl PostulateReport {
    fn holds(postulate: Postulate, measure: MeasureKind, samples: usize) -> Self {
        PostulateReport {
            postulate,
            measure,
            verdict: Verdict::HoldsOnSample,
            witness: None,
            samples,
        }
    }

    fn violated(postulate: Postulate, measure: MeasureKind, samples: usize, witness: Witness) -> Self {
        PostulateReport {
            postulate,
            measure,
            verdict: Verdict::Violated,
            witness: Some(witness),
            samples,
        }
    }

    /// Recomputes a Violated verdict from its witness alone.
    pub fn reverify(&self, config: &MeasureConfig) -> Result<bool, MeasureError> {
        let Some(w) = &self.witness else {
            return Ok(self.verdict == Verdict::HoldsOnSample);
        };
        let sigma = parse_constraints(&w.constraints, w.database.schema())
            .map_err(|e| MeasureError::Engine(crate::error::EngineError::SchemaMismatch(e.to_string())))?;
        let kind = self.measure;
        Ok(match self.postulate {
            Postulate::Positivity => {
                !satisfies(&w.database, &sigma)? && measure(kind, &w.database, &sigma, config)?.value <= EPS
            }
            Postulate::Monotonicity => {
                let extra = w.extra.as_deref().unwrap_or_default();
                let stricter = parse_constraints(&format!("{}\n{extra}", w.constraints), w.database.schema())
                    .map_err(|e| MeasureError::Engine(crate::error::EngineError::SchemaMismatch(e.to_string())))?;
                measure(kind, &w.database, &sigma, config)?.value
                    > measure(kind, &w.database, &stricter, config)?.value + EPS
            }
            Postulate::Progression => {
                !satisfies(&w.database, &sigma)? && best_deletion(kind, &sigma, &w.database, config, false)?.0 <= EPS
            }
            Postulate::Continuity | Postulate::WeightedContinuity => {
                w.values.len() == 3 && w.values[0] > w.values[2] * w.values[1] + EPS
            }
        })
    }
}

fn witness(inst_name: &str, db: &Database, sigma: &ConstraintSet, extra: Option<String>, values: Vec<f64>) -> Witness {
    Witness {
        instance: inst_name.to_owned(),
        database: db.clone(),
        constraints: sigma.to_string(),
        extra,
        values,
    }
}

/// Violated iff some inconsistent instance gets value 0.
pub fn check_positivity(
    kind: MeasureKind,
    instances: &[Instance],
    config: &MeasureConfig,
) -> Result<PostulateReport, MeasureError> {
    let mut samples = 0;
    for inst in instances {
        if satisfies(&inst.db, &inst.sigma)? {
            continue;
        }
        samples += 1;
        let v = measure(kind, &inst.db, &inst.sigma, config)?.value;
        if v <= EPS {
            let w = witness(&inst.name, &inst.db, &inst.sigma, None, vec![v]);
            return Ok(PostulateReport::violated(Postulate::Positivity, kind, samples, w));
        }
    }
    Ok(PostulateReport::holds(Postulate::Positivity, kind, samples))
}

/// Violated iff `I(base, D) > I(base ∪ {extra}, D)` for some database.
pub fn check_monotonicity(
    kind: MeasureKind,
    base: &ConstraintSet,
    extra: &DenialConstraint,
    dbs: &[Database],
    config: &MeasureConfig,
) -> Result<PostulateReport, MeasureError> {
    let cases: Vec<(Instance, DenialConstraint)> = dbs
        .iter()
        .enumerate()
        .map(|(i, db)| {
            (
                Instance {
                    name: format!("database #{i}"),
                    db: db.clone(),
                    sigma: base.clone(),
                },
                extra.clone(),
            )
        })
        .collect();
    check_monotonicity_cases(kind, &cases, config)
}

/// Monotonicity over (instance, extra constraint) pairs.
pub fn check_monotonicity_cases(
    kind: MeasureKind,
    cases: &[(Instance, DenialConstraint)],
    config: &MeasureConfig,
) -> Result<PostulateReport, MeasureError> {
    for (i, (inst, extra)) in cases.iter().enumerate() {
        let mut extra = extra.clone();
        while inst.sigma.get(&extra.label).is_some() {
            extra.label.push_str("_x");
        }
        let stricter = inst.sigma.with(extra.clone()).expect("label made unique");
        let before = measure(kind, &inst.db, &inst.sigma, config)?.value;
        let after = measure(kind, &inst.db, &stricter, config)?.value;
        if before > after + EPS {
            let w = witness(&inst.name, &inst.db, &inst.sigma, Some(extra.to_string()), vec![before, after]);
            return Ok(PostulateReport::violated(Postulate::Monotonicity, kind, i + 1, w));
        }
    }
    Ok(PostulateReport::holds(Postulate::Monotonicity, kind, cases.len()))
}

/// Largest `Δ` (or `Δ/κ` when `weighted`) over single deletions, with the id achieving it.
fn best_deletion(
    kind: MeasureKind,
    sigma: &ConstraintSet,
    db: &Database,
    config: &MeasureConfig,
    weighted: bool,
) -> Result<(f64, Option<RecordId>), MeasureError> {
    let before = measure(kind, db, sigma, config)?.value;
    let mut best = (f64::NEG_INFINITY, None);
    for id in db.ids() {
        let op = RepairOp::Delete { id };
        let mut d = before - measure(kind, &apply_op(db, &op), sigma, config)?.value;
        if weighted {
            d /= config.costs.cost(&op, db);
        }
        if d > best.0 + EPS {
            best = (d, Some(id));
        }
    }
    Ok(best)
}

/// Holds iff some single deletion strictly decreases the measure on `inst`.
pub fn check_progression(
    kind: MeasureKind,
    inst: &Instance,
    config: &MeasureConfig,
) -> Result<PostulateReport, MeasureError> {
    check_progression_all(kind, std::slice::from_ref(inst), config)
}

pub fn check_progression_all(
    kind: MeasureKind,
    instances: &[Instance],
    config: &MeasureConfig,
) -> Result<PostulateReport, MeasureError> {
    let mut samples = 0;
    for inst in instances {
        if satisfies(&inst.db, &inst.sigma)? {
            continue;
        }
        samples += 1;
        let (best, _) = best_deletion(kind, &inst.sigma, &inst.db, config, false)?;
        if best <= EPS {
            let v = measure(kind, &inst.db, &inst.sigma, config)?.value;
            let w = witness(&inst.name, &inst.db, &inst.sigma, None, vec![v, best]);
            return Ok(PostulateReport::violated(Postulate::Progression, kind, samples, w));
        }
    }
    Ok(PostulateReport::holds(Postulate::Progression, kind, samples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityEstimate {
    /// Largest observed ratio, clamped below at 1.
    pub delta_hat: f64,
    pub weighted: bool,
    /// Index of the pair, the deletion on its first database, and the best deletion on the second.
    pub witness: Option<(usize, RecordId, Option<RecordId>)>,
    pub pairs: usize,
    /// Pairs whose second database admits no improving deletion.
    pub skipped: usize,
}

/// `max Δ(o1, D1) / max_o2 Δ(o2, D2)` over the pairs (each Δ divided by the
/// deletion cost when `weighted`).
pub fn estimate_continuity(
    kind: MeasureKind,
    sigma: &ConstraintSet,
    pairs: &[(Database, Database)],
    weighted: bool,
    config: &MeasureConfig,
) -> Result<ContinuityEstimate, MeasureError> {
    let mut est = ContinuityEstimate {
        delta_hat: 1.0,
        weighted,
        witness: None,
        pairs: pairs.len(),
        skipped: 0,
    };
    for (i, (d1, d2)) in pairs.iter().enumerate() {
        let (best2, o2) = best_deletion(kind, sigma, d2, config, weighted)?;
        if best2 <= EPS {
            est.skipped += 1;
            continue;
        }
        let (worst1, o1) = best_deletion(kind, sigma, d1, config, weighted)?;
        let ratio = worst1 / best2;
        if ratio > est.delta_hat + EPS {
            est.delta_hat = ratio;
            est.witness = o1.map(|o| (i, o, o2));
        }
    }
    Ok(est)
}

/// Continuity against a fixed `delta`. Each instance contributes the pairs
/// `(D, D)`, `(D, D − f)` and `(D − f, D)` for every fact `f`.
pub fn check_continuity(
    kind: MeasureKind,
    instances: &[Instance],
    weighted: bool,
    delta: f64,
    config: &MeasureConfig,
) -> Result<PostulateReport, MeasureError> {
    let postulate = if weighted {
        Postulate::WeightedContinuity
    } else {
        Postulate::Continuity
    };
    let mut samples = 0;
    for inst in instances {
        let mut pairs = vec![(inst.db.clone(), inst.db.clone())];
        for id in inst.db.ids() {
            let smaller = apply_op(&inst.db, &RepairOp::Delete { id });
            pairs.push((inst.db.clone(), smaller.clone()));
            pairs.push((smaller, inst.db.clone()));
        }
        let est = estimate_continuity(kind, &inst.sigma, &pairs, weighted, config)?;
        samples += pairs.len() - est.skipped;
        if est.delta_hat > delta + EPS {
            let (i, o1, o2) = est.witness.expect("ratio above 1 has a witness");
            let (d1, _) = &pairs[i];
            let extra = match o2 {
                Some(o2) => format!("delete {o1} on the first database, best deletion {o2} on the second (pair {i})"),
                None => format!("delete {o1} (pair {i})"),
            };
            let w = witness(&inst.name, d1, &inst.sigma, Some(extra), vec![est.delta_hat, delta, 1.0]);
            return Ok(PostulateReport::violated(postulate, kind, samples, w));
        }
    }
    Ok(PostulateReport::holds(postulate, kind, samples))
}

/// Whether the measure provably satisfies the postulate for deletions under
/// DCs (`fds_only` narrows the constraint class to FDs). Continuity here means
/// the weighted form with the bound used by [`continuity_bound`].
pub fn guaranteed(kind: MeasureKind, postulate: Postulate, fds_only: bool) -> bool {
    use MeasureKind as K;
    use Postulate as P;
    match (kind, postulate) {
        (K::MinRepairSubset | K::MinRepairSubsetLin, _) => true,
        (K::Drastic | K::MICount | K::Problematic | K::MaxConsistentPrime, P::Positivity) => true,
        (K::MaxConsistent, P::Positivity) => fds_only,
        (K::Drastic, P::Monotonicity) => true,
        (K::MICount | K::Problematic, P::Monotonicity) => fds_only,
        (K::MICount | K::Problematic, P::Progression) => true,
        _ => false,
    }
}

/// The `delta` tested for weighted continuity: 1 for the repair measure, the
/// largest constraint arity otherwise.
pub fn continuity_bound(kind: MeasureKind, sigma: &ConstraintSet) -> f64 {
    match kind {
        MeasureKind::MinRepairSubset => 1.0,
        _ => sigma.max_arity().max(1) as f64,
    }
}

/// Pairs each instance with a random extra constraint over its schema.
pub fn monotonicity_cases(instances: &[Instance], seed: u64) -> Vec<(Instance, DenialConstraint)> {
    let mut rng = rng_from_seed(seed);
    instances
        .iter()
        .map(|inst| {
            let line = random_dc_line(&mut rng, "extra", 3);
            let dc = parse_constraints(&line, inst.db.schema())
                .expect("generated constraints parse")
                .iter()
                .next()
                .expect("one constraint")
                .clone();
            (inst.clone(), dc)
        })
        .collect()
}

/// Outcome of one postulate on a random sample, next to what theory promises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPostulate {
    pub report: PostulateReport,
    pub guaranteed: bool,
}

impl SampledPostulate {
    /// False only when a guaranteed postulate was found violated.
    pub fn consistent_with_theory(&self) -> bool {
        !(self.guaranteed && self.report.verdict == Verdict::Violated)
    }
}

/// All four postulates for `kind` on `count` random inconsistent DC instances.
pub fn random_suite(
    kind: MeasureKind,
    count: usize,
    rows: usize,
    seed: u64,
    config: &MeasureConfig,
) -> Result<Vec<SampledPostulate>, MeasureError> {
    let instances = inconsistent_dc_instances(count, rows, 3, seed);
    let mut out = Vec::new();
    let mut push = |report: PostulateReport| {
        let guaranteed = guaranteed(kind, report.postulate, false);
        out.push(SampledPostulate { report, guaranteed });
    };
    push(check_positivity(kind, &instances, config)?);
    push(check_monotonicity_cases(kind, &monotonicity_cases(&instances, seed), config)?);
    push(check_progression_all(kind, &instances, config)?);
    let mut cont: Option<PostulateReport> = None;
    let mut samples = 0;
    for inst in &instances {
        let bound = continuity_bound(kind, &inst.sigma);
        let rep = check_continuity(kind, std::slice::from_ref(inst), true, bound, config)?;
        samples += rep.samples;
        if rep.verdict == Verdict::Violated {
            cont = Some(PostulateReport { samples, ..rep });
            break;
        }
    }
    push(cont.unwrap_or_else(|| PostulateReport::holds(Postulate::WeightedContinuity, kind, samples)));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fixtures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureCheck {
    pub what: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl FixtureCheck {
    fn value(what: impl Into<String>, expected: f64, observed: f64) -> Self {
        FixtureCheck {
            what: what.into(),
            expected: format!("{expected}"),
            observed: format!("{observed}"),
            pass: (expected - observed).abs() <= 1e-6,
        }
    }

    fn verdict(what: impl Into<String>, expected: Verdict, report: &PostulateReport) -> Self {
        FixtureCheck {
            what: what.into(),
            expected: format!("{expected:?}"),
            observed: format!("{:?}", report.verdict),
            pass: expected == report.verdict,
        }
    }

    fn flag(what: impl Into<String>, pass: bool, observed: impl Into<String>) -> Self {
        FixtureCheck {
            what: what.into(),
            expected: "true".into(),
            observed: observed.into(),
            pass,
        }
    }
}

pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    /// Measures the fixture's expectations are about.
    pub measures: Vec<MeasureKind>,
    pub databases: Vec<(String, Database)>,
    pub constraints: Vec<(String, ConstraintSet)>,
    checker: fn(&Fixture, &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError>,
}

impl Fixture {
    pub fn check(&self, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
        (self.checker)(self, config)
    }

    fn db(&self, i: usize) -> &Database {
        &self.databases[i].1
    }

    fn sigma(&self, i: usize) -> &ConstraintSet {
        &self.constraints[i].1
    }

    fn instance(&self, db: usize, sigma: usize) -> Instance {
        Instance {
            name: format!("{}:{}:{}", self.name, self.databases[db].0, self.constraints[sigma].0),
            db: self.db(db).clone(),
            sigma: self.sigma(sigma).clone(),
        }
    }
}

fn rows_db(attrs: &[&str], rows: &[&[i64]]) -> Database {
    let mut db = Database::new(Schema::single("R", attrs, ValueKind::Numeric));
    for r in rows {
        db.push(Fact::new("R", r.iter().map(|x| Value::from(*x)).collect())).expect("fits");
    }
    db
}

/// Every single-cell update whose new value is in the column's active domain or
/// is one fresh value per cell.
pub fn single_updates(db: &Database) -> Vec<RepairOp> {
    let mut out = Vec::new();
    let mut fresh = 0usize;
    for (id, f) in db.iter() {
        let sig = db.schema().relation(&f.relation).expect("known relation");
        for (pos, attr) in sig.attributes.iter().enumerate() {
            let domain = db.active_domain(&f.relation, pos);
            for v in domain.iter().filter(|v| **v != f.values[pos]) {
                out.push(RepairOp::Update {
                    id,
                    attribute: attr.name.clone(),
                    value: v.clone(),
                });
            }
            fresh += 1;
            let v = match attr.kind {
                ValueKind::Numeric => Value::num(1000.0 + fresh as f64),
                ValueKind::Text => Value::text(format!("_fresh{fresh}")),
            };
            out.push(RepairOp::Update {
                id,
                attribute: attr.name.clone(),
                value: v,
            });
        }
    }
    out
}

fn continuity_family(n: usize) -> Database {
    let mut rows: Vec<Vec<i64>> = vec![vec![0, 0, 0]];
    for i in 1..=n as i64 {
        rows.push(vec![0, 1, i]);
    }
    for j in 1..=n as i64 {
        for k in 1..=2 {
            rows.push(vec![j, k, 0]);
        }
    }
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    rows_db(&["A", "B", "C"], &refs)
}

fn ids_of(sets: &[Vec<RecordId>]) -> Vec<Vec<u64>> {
    sets.iter().map(|s| s.iter().map(|i| i.0).collect()).collect()
}

fn airport_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let unit = MeasureConfig {
        costs: crate::repair::CostModel::unit(),
        ..*config
    };
    let sigma = fx.sigma(0);
    let table: [(usize, [f64; 7]); 3] = [
        (0, [0.0; 7]),
        (1, [1.0, 3.0, 4.0, 7.0, 5.0, 3.0, 2.5]),
        (2, [1.0, 2.0, 3.0, 5.0, 4.0, 2.0, 2.0]),
    ];
    let kinds = [
        MeasureKind::Drastic,
        MeasureKind::MinRepairSubset,
        MeasureKind::MinRepairUpdate,
        MeasureKind::MICount,
        MeasureKind::Problematic,
        MeasureKind::MaxConsistent,
        MeasureKind::MinRepairSubsetLin,
    ];
    let mut out = Vec::new();
    for (d, expected) in table {
        for (k, e) in kinds.iter().zip(expected) {
            let v = measure(*k, fx.db(d), sigma, &unit)?.value;
            out.push(FixtureCheck::value(format!("{} on {}", k, fx.databases[d].0), e, v));
        }
    }
    let mc1 = maximal_consistent_subsets(fx.db(1), sigma, config.mc)?;
    out.push(FixtureCheck {
        what: "MC sets of D1".into(),
        expected: "[[1, 2], [1, 3], [1, 4], [5]]".into(),
        observed: format!("{:?}", ids_of(&mc1)),
        pass: ids_of(&mc1) == vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![5]],
    });
    let mc2 = maximal_consistent_subsets(fx.db(2), sigma, config.mc)?;
    out.push(FixtureCheck {
        what: "MC sets of D2".into(),
        expected: "[[1, 2], [1, 3, 5], [1, 4]]".into(),
        observed: format!("{:?}", ids_of(&mc2)),
        pass: ids_of(&mc2) == vec![vec![1, 2], vec![1, 3, 5], vec![1, 4]],
    });
    Ok(out)
}

fn imc_monotonicity_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let mut out = Vec::new();
    for k in [MeasureKind::MaxConsistent, MeasureKind::MaxConsistentPrime] {
        let a = measure(k, fx.db(0), fx.sigma(0), config)?.value;
        let b = measure(k, fx.db(0), fx.sigma(1), config)?.value;
        out.push(FixtureCheck::value(format!("{k} under sigma1"), 3.0, a));
        out.push(FixtureCheck::value(format!("{k} under sigma2"), 1.0, b));
        let extra = fx.sigma(1).iter().find(|c| fx.sigma(0).get(&c.label).is_none()).expect("extra").clone();
        let rep = check_monotonicity(k, fx.sigma(0), &extra, &[fx.db(0).clone()], config)?;
        out.push(FixtureCheck::verdict(format!("{k} monotonicity"), Verdict::Violated, &rep));
        out.push(FixtureCheck::flag(
            format!("{k} witness replays"),
            rep.reverify(config)?,
            "reverify",
        ));
    }
    Ok(out)
}

fn imc_progression_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let mut out = Vec::new();
    let db = fx.db(0);
    let sigma = fx.sigma(1);
    for id in db.ids() {
        let v = measure(MeasureKind::MaxConsistent, &apply_op(db, &RepairOp::Delete { id }), sigma, config)?.value;
        out.push(FixtureCheck::value(format!("mc after deleting {id}"), 1.0, v));
    }
    let rep = check_progression(MeasureKind::MaxConsistent, &fx.instance(0, 1), config)?;
    out.push(FixtureCheck::verdict("mc progression", Verdict::Violated, &rep));
    let rep = check_progression(MeasureKind::MaxConsistentPrime, &fx.instance(0, 1), config)?;
    out.push(FixtureCheck::verdict("mcp progression", Verdict::Violated, &rep));
    Ok(out)
}

fn continuity_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let mut out = Vec::new();
    let sigma = fx.sigma(0);
    for (name, db) in &fx.databases {
        let n = ((db.len() - 1) / 3) as f64;
        let f0 = RecordId(0);
        let after = apply_op(db, &RepairOp::Delete { id: f0 });
        let p = measure(MeasureKind::Problematic, db, sigma, config)?.value;
        let mi = measure(MeasureKind::MICount, db, sigma, config)?.value;
        out.push(FixtureCheck::value(format!("p on {name}"), 3.0 * n + 1.0, p));
        out.push(FixtureCheck::value(format!("mi on {name}"), 2.0 * n, mi));
        let p2 = measure(MeasureKind::Problematic, &after, sigma, config)?.value;
        let mi2 = measure(MeasureKind::MICount, &after, sigma, config)?.value;
        out.push(FixtureCheck::value(format!("p on {name} without f0"), 2.0 * n, p2));
        out.push(FixtureCheck::value(format!("mi on {name} without f0"), n, mi2));
        let pair = [(db.clone(), after.clone())];
        let e_mi = estimate_continuity(MeasureKind::MICount, sigma, &pair, false, config)?;
        let e_p = estimate_continuity(MeasureKind::Problematic, sigma, &pair, false, config)?;
        let e_r = estimate_continuity(MeasureKind::MinRepairSubset, sigma, &pair, false, config)?;
        out.push(FixtureCheck::value(format!("mi continuity ratio on {name}"), n, e_mi.delta_hat));
        out.push(FixtureCheck::value(format!("p continuity ratio on {name}"), (n + 1.0) / 2.0, e_p.delta_hat));
        out.push(FixtureCheck::value(format!("r continuity ratio on {name}"), 1.0, e_r.delta_hat));
    }
    Ok(out)
}

fn positivity_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let mc = measure(MeasureKind::MaxConsistent, fx.db(0), fx.sigma(0), config)?.value;
    let mcp = measure(MeasureKind::MaxConsistentPrime, fx.db(0), fx.sigma(0), config)?.value;
    let inst = [fx.instance(0, 0)];
    let rep_mc = check_positivity(MeasureKind::MaxConsistent, &inst, config)?;
    let rep_mcp = check_positivity(MeasureKind::MaxConsistentPrime, &inst, config)?;
    Ok(vec![
        FixtureCheck::value("mc", 0.0, mc),
        FixtureCheck::value("mcp", 1.0, mcp),
        FixtureCheck::verdict("mc positivity", Verdict::Violated, &rep_mc),
        FixtureCheck::verdict("mcp positivity", Verdict::HoldsOnSample, &rep_mcp),
        FixtureCheck::flag("mc witness replays", rep_mc.reverify(config)?, "reverify"),
    ])
}

fn update1_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let (db, sigma) = (fx.db(0), fx.sigma(0));
    let mut out = vec![
        FixtureCheck::value("mi", 1.0, measure(MeasureKind::MICount, db, sigma, config)?.value),
        FixtureCheck::value("p", 2.0, measure(MeasureKind::Problematic, db, sigma, config)?.value),
    ];
    let ops = single_updates(db);
    let mut mi_same = true;
    let mut p_same = true;
    let mut seen = Vec::new();
    for op in &ops {
        let d = apply_op(db, op);
        let mi = measure(MeasureKind::MICount, &d, sigma, config)?.value;
        let p = measure(MeasureKind::Problematic, &d, sigma, config)?.value;
        mi_same &= mi == 1.0;
        p_same &= p == 2.0;
        if mi != 1.0 || p != 2.0 {
            seen.push(op.to_string());
        }
    }
    out.push(FixtureCheck::flag(
        format!("mi unchanged by all {} single updates", ops.len()),
        mi_same,
        format!("{seen:?}"),
    ));
    out.push(FixtureCheck::flag(
        format!("p unchanged by all {} single updates", ops.len()),
        p_same,
        format!("{seen:?}"),
    ));
    Ok(out)
}

fn update2_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let (db, sigma) = (fx.db(0), fx.sigma(0));
    let v = measure(MeasureKind::MinViolations, db, sigma, config)?.value;
    let ops = single_updates(db);
    let mut min_after = f64::INFINITY;
    for op in &ops {
        let after = measure(MeasureKind::MinViolations, &apply_op(db, op), sigma, config)?.value;
        min_after = min_after.min(after);
    }
    Ok(vec![
        FixtureCheck::value("viol", 4.0, v),
        FixtureCheck {
            what: format!("smallest viol over all {} single updates", ops.len()),
            expected: ">= 4".into(),
            observed: format!("{min_after}"),
            pass: min_after >= 4.0,
        },
    ])
}

fn imi_size_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let db = fx.db(0);
    let a = measure(MeasureKind::MICount, db, fx.sigma(0), config)?.value;
    let b = measure(MeasureKind::MICount, db, fx.sigma(1), config)?.value;
    let extra = fx.sigma(1).iter().find(|c| fx.sigma(0).get(&c.label).is_none()).expect("extra").clone();
    let rep = check_monotonicity(MeasureKind::MICount, fx.sigma(0), &extra, std::slice::from_ref(db), config)?;
    Ok(vec![
        FixtureCheck::value("mi with at most two facts allowed", 20.0, a),
        FixtureCheck::value("mi with at most one fact allowed", 15.0, b),
        FixtureCheck::verdict("mi monotonicity", Verdict::Violated, &rep),
    ])
}

fn ip_monotonicity_checks(fx: &Fixture, config: &MeasureConfig) -> Result<Vec<FixtureCheck>, MeasureError> {
    let db = fx.db(0);
    let a = measure(MeasureKind::Problematic, db, fx.sigma(0), config)?.value;
    let b = measure(MeasureKind::Problematic, db, fx.sigma(1), config)?.value;
    let extra = fx.sigma(1).iter().find(|c| fx.sigma(0).get(&c.label).is_none()).expect("extra").clone();
    let rep = check_monotonicity(MeasureKind::Problematic, fx.sigma(0), &extra, std::slice::from_ref(db), config)?;
    Ok(vec![
        FixtureCheck::value("p under sigma1", 3.0, a),
        FixtureCheck::value("p under sigma2", 2.0, b),
        FixtureCheck::verdict("p monotonicity", Verdict::Violated, &rep),
    ])
}

/// The counterexample constructions and the running example, with their expected values.
pub fn builtin_fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();

    let d0 = airport_example(0);
    out.push(Fixture {
        name: "airport",
        summary: "running example: clean D0 and noisy D1, D2 under the two airport FDs",
        measures: vec![
            MeasureKind::Drastic,
            MeasureKind::MinRepairSubset,
            MeasureKind::MinRepairUpdate,
            MeasureKind::MICount,
            MeasureKind::Problematic,
            MeasureKind::MaxConsistent,
            MeasureKind::MinRepairSubsetLin,
        ],
        constraints: vec![("airport".into(), airport_constraints(d0.schema()))],
        databases: vec![
            ("D0".into(), d0),
            ("D1".into(), airport_example(1)),
            ("D2".into(), airport_example(2)),
        ],
        checker: airport_checks,
    });

    let db = rows_db(&["A", "B", "C", "D"], &[&[0, 0, 0, 0], &[1, 0, 0, 0], &[1, 1, 0, 1], &[0, 1, 0, 1]]);
    let s1 = parse_constraints("FD R: A -> B", db.schema()).expect("parses");
    let s2 = parse_constraints("FD R: A -> B\nFD R: C -> D", db.schema()).expect("parses");
    out.push(Fixture {
        name: "imc-monotonicity",
        summary: "adding C -> D shrinks the number of maximal consistent subsets from 4 to 2",
        measures: vec![MeasureKind::MaxConsistent, MeasureKind::MaxConsistentPrime],
        databases: vec![("D".into(), db.clone())],
        constraints: vec![("sigma1".into(), s1.clone()), ("sigma2".into(), s2.clone())],
        checker: imc_monotonicity_checks,
    });
    out.push(Fixture {
        name: "imc-progression",
        summary: "under A -> B and C -> D no single deletion lowers the maximal-consistent count",
        measures: vec![MeasureKind::MaxConsistent, MeasureKind::MaxConsistentPrime],
        databases: vec![("D".into(), db)],
        constraints: vec![("sigma1".into(), s1), ("sigma2".into(), s2)],
        checker: imc_progression_checks,
    });

    let fam: Vec<(String, Database)> = [3, 5, 10].iter().map(|&n| (format!("D({n})"), continuity_family(n))).collect();
    let s = parse_constraints("FD R: A -> B", fam[0].1.schema()).expect("parses");
    out.push(Fixture {
        name: "continuity-family",
        summary: "one deletion removes n conflicts while the next best removes one",
        measures: vec![MeasureKind::MICount, MeasureKind::Problematic, MeasureKind::MinRepairSubset],
        databases: fam,
        constraints: vec![("A->B".into(), s)],
        checker: continuity_checks,
    });

    let mut db = Database::new(Schema::single("R", &["A"], ValueKind::Text));
    db.push(Fact::new("R", vec![Value::text("a")])).expect("fits");
    db.push(Fact::new("R", vec![Value::text("b")])).expect("fits");
    let s = parse_constraints("DC no_a: t in R | t.A = \"a\"", db.schema()).expect("parses");
    out.push(Fixture {
        name: "positivity",
        summary: "a self-inconsistent fact leaves a single maximal consistent subset",
        measures: vec![MeasureKind::MaxConsistent, MeasureKind::MaxConsistentPrime],
        databases: vec![("D".into(), db)],
        constraints: vec![("no-a".into(), s)],
        checker: positivity_checks,
    });

    let db = rows_db(&["A", "B", "C", "D"], &[&[0, 0, 0, 0], &[0, 1, 0, 1]]);
    let s = parse_constraints("FD R: A -> B\nFD R: C -> D", db.schema()).expect("parses");
    out.push(Fixture {
        name: "update-example-1",
        summary: "two facts violating two FDs; no single update resolves the pair",
        measures: vec![MeasureKind::MICount, MeasureKind::Problematic],
        databases: vec![("D".into(), db)],
        constraints: vec![("sigma".into(), s)],
        checker: update1_checks,
    });

    let db = rows_db(
        &["A", "B", "C", "D", "E"],
        &[&[0, 0, 0, 0, 1], &[0, 0, 0, 0, 2], &[0, 1, 1, 0, 3], &[0, 1, 1, 0, 4]],
    );
    let s = parse_constraints("FD R: A -> B\nFD R: B -> C\nFD R: D -> A", db.schema()).expect("parses");
    out.push(Fixture {
        name: "update-example-2",
        summary: "four minimal violations and no single update that lowers their number",
        measures: vec![MeasureKind::MinViolations],
        databases: vec![("D".into(), db)],
        constraints: vec![("sigma".into(), s)],
        checker: update2_checks,
    });

    let db = rows_db(&["A"], &[&[1], &[2], &[3], &[4], &[5], &[6]]);
    let three = "DC at_most_2: t in R, s in R, u in R | t.A < s.A, s.A < u.A";
    let two = "DC at_most_1: t in R, s in R | t.A < s.A";
    out.push(Fixture {
        name: "imi-size-bound",
        summary: "allowing fewer facts turns C(6,3) minimal subsets into C(6,2)",
        measures: vec![MeasureKind::MICount],
        constraints: vec![
            ("sigma3".into(), parse_constraints(three, db.schema()).expect("parses")),
            ("sigma3+sigma2".into(), parse_constraints(&format!("{three}\n{two}"), db.schema()).expect("parses")),
        ],
        databases: vec![("D".into(), db)],
        checker: imi_size_checks,
    });

    let mut schema = Schema::single("R", &["A", "B"], ValueKind::Text);
    schema.merge(&Schema::single("S", &["A", "B"], ValueKind::Text)).expect("distinct relations");
    let mut db = Database::new(schema);
    for (rel, a, b) in [("R", "a", "b"), ("S", "a", "c"), ("S", "a", "d")] {
        db.push(Fact::new(rel, vec![Value::text(a), Value::text(b)])).expect("fits");
    }
    let s1 = "DC rss: r in R, s in S, u in S | r.A = s.A, s.A = u.A, s.B != u.B";
    let s2 = "DC ss: s in S, u in S | s.A = u.A, s.B != u.B";
    out.push(Fixture {
        name: "ip-monotonicity",
        summary: "the stricter two-atom constraint drops R(a,b) from every minimal subset",
        measures: vec![MeasureKind::Problematic],
        constraints: vec![
            ("sigma1".into(), parse_constraints(s1, db.schema()).expect("parses")),
            ("sigma2".into(), parse_constraints(&format!("{s1}\n{s2}"), db.schema()).expect("parses")),
        ],
        databases: vec![("D".into(), db)],
        checker: ip_monotonicity_checks,
    });

    out
}

pub fn fixture(name: &str) -> Option<Fixture> {
    builtin_fixtures().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_passes() {
        let cfg = MeasureConfig::default();
        for fx in builtin_fixtures() {
            for c in fx.check(&cfg).unwrap() {
                assert!(c.pass, "{}: {} expected {} got {}", fx.name, c.what, c.expected, c.observed);
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_fd_instance(FdParams::default(), 4), random_fd_instance(FdParams::default(), 4));
        assert_eq!(random_dc_instance(8, 3, 4), random_dc_instance(8, 3, 4));
        assert_eq!(inconsistent_dc_instances(5, 8, 3, 0).len(), 5);
    }
}
