//! Noise generators for dirtying clean databases.
//!
//! Randomness comes from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`), so a seed fixes the stream on every
//! platform.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::constraints::{CmpOp, ConstraintSet, Term};
use crate::error::NoiseError;
use crate::model::{Database, RecordId, Value};
use crate::repair::quote_value;

pub type NoiseRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> NoiseRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum NoiseAlgorithm {
    CONoise { iterations: usize },
    RNoise { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub algorithm: NoiseAlgorithm,
    pub typo_prob: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn conoise(iterations: usize, seed: u64) -> Self {
        NoiseConfig {
            algorithm: NoiseAlgorithm::CONoise { iterations },
            typo_prob: 0.5,
            seed,
        }
    }

    pub fn rnoise(alpha: f64, beta: f64, seed: u64) -> Self {
        NoiseConfig {
            algorithm: NoiseAlgorithm::RNoise { alpha, beta },
            typo_prob: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(0.0..=1.0).contains(&self.typo_prob) {
            return Err(NoiseError::BadParameter {
                name: "typo probability",
                expected: "in [0, 1]",
                value: self.typo_prob,
            });
        }
        if let NoiseAlgorithm::RNoise { alpha, beta } = self.algorithm {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(NoiseError::BadAlpha(alpha));
            }
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(NoiseError::BadParameter {
                    name: "beta",
                    expected: "finite and non-negative",
                    value: beta,
                });
            }
        }
        Ok(())
    }
}

fn random_word(rng: &mut NoiseRng, len: usize) -> String {
    (0..len).map(|_| char::from(b'a' + rng.gen_range(0..26u8))).collect()
}

fn describe_change(id: RecordId, attr: &str, old: &Value, new: &Value) -> String {
    format!("{id}.{attr} {} -> {}", quote_value(old), quote_value(new))
}

/// One constraint-oriented noise step, in place. Picks a constraint uniformly,
/// then distinct facts for its variables, then edits cells until every predicate
/// holds on those facts. Returns a description of the step.
pub fn conoise_step_in_place(db: &mut Database, sigma: &ConstraintSet, rng: &mut NoiseRng) -> Result<String, NoiseError> {
    if sigma.is_empty() {
        return Err(NoiseError::NoConstraints);
    }
    let dc = sigma.iter().nth(rng.gen_range(0..sigma.len())).expect("index below len");
    let mut chosen: Vec<RecordId> = Vec::with_capacity(dc.arity());
    for v in &dc.vars {
        let pool: Vec<RecordId> = db
            .ids_of(&v.relation)
            .into_iter()
            .filter(|id| !chosen.contains(id))
            .collect();
        if pool.is_empty() {
            let have = db.ids_of(&v.relation).len();
            return Err(NoiseError::TooFewTuples {
                relation: v.relation.clone(),
                have,
                need: dc.vars.iter().filter(|w| w.relation == v.relation).count(),
            });
        }
        chosen.push(pool[rng.gen_range(0..pool.len())]);
    }
    let ids: Vec<String> = chosen.iter().map(ToString::to_string).collect();
    let mut desc = format!("conoise {} on {}", dc.label, ids.join(","));
    for p in &dc.predicates {
        let holds = {
            let facts: Vec<&crate::model::Fact> = chosen.iter().map(|id| db.get(*id).expect("chosen from db")).collect();
            p.holds(&facts)
        };
        if holds {
            continue;
        }
        // (target term, other term, operator as seen from the target)
        let (target, other, op) = match (&p.lhs, &p.rhs) {
            (Term::Attr { .. }, Term::Const(_)) => (&p.lhs, &p.rhs, p.op),
            (Term::Const(_), Term::Attr { .. }) => (&p.rhs, &p.lhs, p.op.flipped()),
            (Term::Attr { .. }, Term::Attr { .. }) => {
                if rng.gen_bool(0.5) {
                    (&p.lhs, &p.rhs, p.op)
                } else {
                    (&p.rhs, &p.lhs, p.op.flipped())
                }
            }
            (Term::Const(_), Term::Const(_)) => continue,
        };
        let &Term::Attr { var, pos, ref name } = target else { unreachable!() };
        let id = chosen[var];
        let other_value = match other {
            Term::Const(v) => v.clone(),
            &Term::Attr { var: ov, pos: op_, .. } => db.get(chosen[ov]).expect("chosen").values[op_].clone(),
        };
        if matches!(other, &Term::Attr { var: ov, pos: opos, .. } if ov == var && opos == pos) {
            // a cell compared with itself cannot be forced
            continue;
        }
        let old = db.get(id).expect("chosen").values[pos].clone();
        let new = match op {
            CmpOp::Eq | CmpOp::Le | CmpOp::Ge => other_value,
            CmpOp::Lt | CmpOp::Gt | CmpOp::Ne => {
                let relation = &db.get(id).expect("chosen").relation.clone();
                let domain: Vec<Value> = db
                    .active_domain(relation, pos)
                    .into_iter()
                    .filter(|v| op.eval(v, &other_value))
                    .collect();
                if !domain.is_empty() {
                    domain[rng.gen_range(0..domain.len())].clone()
                } else if let Some(o) = other_value.as_f64() {
                    let col: Vec<f64> = db
                        .ids_of(relation)
                        .iter()
                        .filter_map(|i| db.get(*i).expect("listed").values[pos].as_f64())
                        .collect();
                    let lo = col.iter().copied().fold(o, f64::min) - 1.0;
                    let hi = col.iter().copied().fold(o, f64::max) + 1.0;
                    let x = match op {
                        CmpOp::Lt => rng.gen_range(lo..o),
                        CmpOp::Gt => loop {
                            let x = rng.gen_range(o..=hi);
                            if x > o {
                                break x;
                            }
                        },
                        _ => loop {
                            let x = rng.gen_range(lo..=hi);
                            if x != o {
                                break x;
                            }
                        },
                    };
                    Value::num(x)
                } else {
                    loop {
                        let w = Value::text(random_word(rng, 6));
                        if w != other_value {
                            break w;
                        }
                    }
                }
            }
        };
        if new != old {
            desc.push_str("; ");
            desc.push_str(&describe_change(id, name, &old, &new));
            db.set_value(id, pos, new).expect("value of the column's kind");
        }
    }
    Ok(desc)
}

pub fn conoise_step(db: &Database, sigma: &ConstraintSet, rng: &mut NoiseRng) -> Result<(Database, String), NoiseError> {
    let mut out = db.clone();
    let desc = conoise_step_in_place(&mut out, sigma, rng)?;
    Ok((out, desc))
}

/// Typo of a value: for text, delete, duplicate or swap adjacent characters
/// (uniformly among the edits that change the string); for numbers, replace
/// one decimal digit with a different one.
pub fn typo(v: &Value, rng: &mut NoiseRng) -> Value {
    match v {
        Value::Text(s) => {
            let chars: Vec<char> = s.chars().collect();
            if chars.is_empty() {
                return Value::text(random_word(rng, 1));
            }
            let swaps: Vec<usize> = (0..chars.len().saturating_sub(1))
                .filter(|&i| chars[i] != chars[i + 1])
                .collect();
            let mut edits = vec![0u8, 1];
            if !swaps.is_empty() {
                edits.push(2);
            }
            let mut out = chars.clone();
            match edits[rng.gen_range(0..edits.len())] {
                0 => {
                    out.remove(rng.gen_range(0..chars.len()));
                }
                1 => {
                    let i = rng.gen_range(0..chars.len());
                    out.insert(i, chars[i]);
                }
                _ => {
                    let i = swaps[rng.gen_range(0..swaps.len())];
                    out.swap(i, i + 1);
                }
            }
            Value::text(out.into_iter().collect::<String>())
        }
        Value::Num(x) => {
            let text = format!("{x}");
            let digits: Vec<usize> = text.char_indices().filter(|(_, c)| c.is_ascii_digit()).map(|(i, _)| i).collect();
            let at = digits[rng.gen_range(0..digits.len())];
            let old = text.as_bytes()[at] - b'0';
            let mut d = rng.gen_range(0..9u8);
            if d >= old {
                d += 1;
            }
            let mut bytes = text.into_bytes();
            bytes[at] = b'0' + d;
            let s = String::from_utf8(bytes).expect("ascii");
            Value::num(s.parse().expect("digit swap keeps a valid number"))
        }
    }
}

/// Draws from `values` with weight `rank^-beta` (rank 1 for the first value).
pub fn zipf_pick<'v>(values: &'v [Value], beta: f64, rng: &mut NoiseRng) -> &'v Value {
    let weights: Vec<f64> = (1..=values.len()).map(|i| (i as f64).powf(-beta)).collect();
    let dist = WeightedIndex::new(&weights).expect("non-empty, positive weights");
    &values[dist.sample(rng)]
}

/// Random cell-level noise over the cells of attributes that occur in some constraint.
pub struct RNoise {
    cells: Vec<(RecordId, usize)>,
    steps: usize,
    done: usize,
    beta: f64,
    typo_prob: f64,
}

impl RNoise {
    pub fn new(db: &Database, sigma: &ConstraintSet, alpha: f64, beta: f64, typo_prob: f64) -> Result<Self, NoiseError> {
        NoiseConfig {
            algorithm: NoiseAlgorithm::RNoise { alpha, beta },
            typo_prob,
            seed: 0,
        }
        .validate()?;
        let used = sigma.attributes_used();
        let cells: Vec<(RecordId, usize)> = db
            .iter()
            .flat_map(|(id, f)| {
                let used = &used;
                (0..f.values.len())
                    .filter(move |&p| used.contains(&(f.relation.clone(), p)))
                    .map(move |p| (id, p))
            })
            .collect();
        if cells.is_empty() {
            return Err(NoiseError::NoRelevantCells);
        }
        let steps = (alpha * cells.len() as f64).ceil() as usize;
        Ok(RNoise {
            cells,
            steps,
            done: 0,
            beta,
            typo_prob,
        })
    }

    pub fn total_steps(&self) -> usize {
        self.steps
    }

    /// Modifies one cell; `None` once all steps are done.
    pub fn step(&mut self, db: &mut Database, rng: &mut NoiseRng) -> Option<String> {
        if self.done >= self.steps {
            return None;
        }
        self.done += 1;
        let (id, pos) = self.cells[rng.gen_range(0..self.cells.len())];
        let fact = db.get(id).expect("cells come from this database");
        let relation = fact.relation.clone();
        let old = fact.values[pos].clone();
        let attr = db.schema().relation(&relation).expect("known").attributes[pos].name.clone();
        let mut kind = "typo";
        let new = if rng.gen_bool(self.typo_prob) {
            typo(&old, rng)
        } else {
            let domain: Vec<Value> = db.active_domain(&relation, pos).into_iter().filter(|v| *v != old).collect();
            if domain.is_empty() {
                typo(&old, rng)
            } else {
                kind = "zipf";
                zipf_pick(&domain, self.beta, rng).clone()
            }
        };
        let desc = format!("rnoise {kind} {}", describe_change(id, &attr, &old, &new));
        db.set_value(id, pos, new).expect("value of the column's kind");
        Some(desc)
    }
}

/// Every intermediate database of an RNoise run, with step descriptions.
pub fn rnoise_run(db: &Database, sigma: &ConstraintSet, config: &NoiseConfig) -> Result<Vec<(Database, String)>, NoiseError> {
    let NoiseAlgorithm::RNoise { alpha, beta } = config.algorithm else {
        return Err(NoiseError::BadParameter {
            name: "algorithm",
            expected: "RNoise",
            value: f64::NAN,
        });
    };
    let mut gen = RNoise::new(db, sigma, alpha, beta, config.typo_prob)?;
    let mut rng = rng_from_seed(config.seed);
    let mut cur = db.clone();
    let mut out = Vec::with_capacity(gen.total_steps());
    while let Some(desc) = gen.step(&mut cur, &mut rng) {
        out.push((cur.clone(), desc));
    }
    Ok(out)
}

/// Applies a whole noise run and returns the final database.
pub fn add_noise(db: &Database, sigma: &ConstraintSet, config: &NoiseConfig) -> Result<Database, NoiseError> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let mut cur = db.clone();
    match config.algorithm {
        NoiseAlgorithm::CONoise { iterations } => {
            for _ in 0..iterations {
                conoise_step_in_place(&mut cur, sigma, &mut rng)?;
            }
        }
        NoiseAlgorithm::RNoise { alpha, beta } => {
            let mut gen = RNoise::new(db, sigma, alpha, beta, config.typo_prob)?;
            while gen.step(&mut cur, &mut rng).is_some() {}
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_constraints;
    use crate::model::{Fact, Schema, ValueKind};
    use crate::violations::satisfies;

    fn db() -> Database {
        let mut d = Database::new(Schema::single("R", &["A", "B"], ValueKind::Text));
        for i in 0..6 {
            d.push(Fact::new("R", vec![Value::text(format!("a{i}")), Value::text("b")])).unwrap();
        }
        d
    }

    #[test]
    fn conoise_creates_a_violation() {
        let d = db();
        let s = parse_constraints("FD R: A -> B", d.schema()).unwrap();
        assert!(satisfies(&d, &s).unwrap());
        let mut rng = rng_from_seed(3);
        let (out, desc) = conoise_step(&d, &s, &mut rng).unwrap();
        assert!(!satisfies(&out, &s).unwrap(), "{desc}");
    }

    #[test]
    fn single_variable_constraints_use_one_fact() {
        let mut d = Database::new(Schema::single("S", &["Lo", "Hi"], ValueKind::Numeric));
        for i in 0..4 {
            d.push(Fact::new("S", vec![Value::num(i as f64), Value::num(i as f64 + 5.0)])).unwrap();
        }
        let s = parse_constraints("DC h: t in S | t.Hi < t.Lo", d.schema()).unwrap();
        let mut rng = rng_from_seed(11);
        let (out, _) = conoise_step(&d, &s, &mut rng).unwrap();
        assert!(!satisfies(&out, &s).unwrap());
    }

    #[test]
    fn typos_change_values() {
        let mut rng = rng_from_seed(1);
        for v in [Value::text("ab"), Value::text(""), Value::text("aaa"), Value::num(10.0), Value::num(0.25)] {
            for _ in 0..20 {
                assert_ne!(typo(&v, &mut rng), v);
            }
        }
    }

    #[test]
    fn rnoise_is_deterministic_and_counts_steps() {
        let d = db();
        let s = parse_constraints("FD R: A -> B", d.schema()).unwrap();
        let cfg = NoiseConfig::rnoise(0.25, 1.0, 9);
        let a = rnoise_run(&d, &s, &cfg).unwrap();
        let b = rnoise_run(&d, &s, &cfg).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, b);
        assert!(matches!(
            rnoise_run(&d, &s, &NoiseConfig::rnoise(0.0, 1.0, 9)),
            Err(NoiseError::BadAlpha(_))
        ));
    }
}
