//! The five-airport running example and synthetic stand-ins for the airport and
//! stock datasets.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::constraints::{parse_constraints, ConstraintSet};
use crate::model::{Attribute, Database, Fact, RecordId, Schema, Signature, Value, ValueKind};
use crate::noise::rng_from_seed;
use crate::repair::{RepairOp, RepairScript};

pub const AIRPORT_CONSTRAINTS: &str = "FD Airport: Municipality -> Continent, Country\nFD Airport: Country -> Continent\n";

pub const STOCK_CONSTRAINTS: &str = "\
DC hl: t in Stock | t.High < t.Low
DC oh: t in Stock | t.Open > t.High
DC ol: t in Stock | t.Open < t.Low
DC ch: t in Stock | t.Close > t.High
DC cl: t in Stock | t.Close < t.Low
DC sd: t in Stock, s in Stock | t.Symbol = s.Symbol, t.Date = s.Date, t.Close != s.Close
";

pub const AIRPORT_ATTRIBUTES: [&str; 6] = ["Id", "Type", "Name", "Continent", "Country", "Municipality"];

pub fn airport_schema() -> Schema {
    Schema::single("Airport", &AIRPORT_ATTRIBUTES, ValueKind::Text)
}

pub fn airport_constraints(schema: &Schema) -> ConstraintSet {
    parse_constraints(AIRPORT_CONSTRAINTS, schema).expect("built-in constraints parse")
}

/// The running example: `version` 0 is clean, 1 and 2 are the noisy copies.
/// Facts carry ids 1 to 5.
pub fn airport_example(version: u8) -> Database {
    let (c2, k2, k4, c5) = match version {
        0 => ("NAm", "US", "US", "NAm"),
        1 => ("Am", "USA", "USA", "Am"),
        2 => ("Am", "USA", "USA", "NAm"),
        _ => panic!("airport example versions are 0, 1 and 2"),
    };
    let rows = [
        ["00AA", "Small airport", "Aero B Ranch", "NAm", "US", "Leoti"],
        ["7FA0", "heliport", "Florida Keys Memorial Hospital Heliport", c2, k2, "Key West"],
        ["7FA1", "Small airport", "Sugar Loaf Shores Airport", "NAm", "US", "Key West"],
        ["KEYW", "Medium airport", "Key West International Airport", "NAm", k4, "Key West"],
        ["KNQX", "Medium airport", "Naval Air Station Key West/Boca Chica Field", c5, "US", "Key West"],
    ];
    let mut db = Database::new(airport_schema());
    for (i, r) in rows.iter().enumerate() {
        let fact = Fact::new("Airport", r.iter().map(|s| Value::text(*s)).collect());
        db.insert(RecordId(i as u64 + 1), fact).expect("fixture fits the schema");
    }
    db
}

/// The four updates turning the clean example into the first noisy copy.
pub fn airport_d0_to_d1() -> RepairScript {
    RepairScript::new(vec![
        RepairOp::update(2, "Continent", "Am"),
        RepairOp::update(2, "Country", "USA"),
        RepairOp::update(4, "Country", "USA"),
        RepairOp::update(5, "Continent", "Am"),
    ])
}

const CONTINENTS: [&str; 6] = ["AF", "AS", "EU", "NAm", "OC", "SAm"];
const TYPES: [&str; 5] = ["Small airport", "Medium airport", "Large airport", "heliport", "seaplane base"];

/// A clean airport-like relation satisfying both FDs: about 150 countries and
/// 500 municipalities spread over six continents.
pub fn airport_like(rows: usize, seed: u64) -> Database {
    let mut rng = rng_from_seed(seed);
    let countries: Vec<(String, &str)> = (0..150)
        .map(|i| (format!("C{i:03}"), CONTINENTS[rng.gen_range(0..CONTINENTS.len())]))
        .collect();
    let towns: Vec<(String, usize)> = (0..500)
        .map(|i| (format!("Town{i:03}"), rng.gen_range(0..countries.len())))
        .collect();
    let mut db = Database::new(airport_schema());
    for i in 0..rows {
        let (town, c) = &towns[rng.gen_range(0..towns.len())];
        let (country, continent) = &countries[*c];
        let values = vec![
            Value::text(format!("A{i:05}")),
            Value::text(*TYPES.choose(&mut rng).expect("non-empty")),
            Value::text(format!("{town} Field {i}")),
            Value::text(*continent),
            Value::text(country.clone()),
            Value::text(town.clone()),
        ];
        db.push(Fact::new("Airport", values)).expect("fits the schema");
    }
    db
}

pub fn stock_schema() -> Schema {
    let mut attrs = vec![
        Attribute::new("Symbol", ValueKind::Text),
        Attribute::new("Date", ValueKind::Text),
    ];
    for name in ["Open", "High", "Low", "Close", "Volume"] {
        attrs.push(Attribute::new(name, ValueKind::Numeric));
    }
    Schema::new()
        .with_relation("Stock", Signature::new(attrs).expect("distinct"))
        .expect("one relation")
}

pub fn stock_constraints(schema: &Schema) -> ConstraintSet {
    parse_constraints(STOCK_CONSTRAINTS, schema).expect("built-in constraints parse")
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// A clean stock-quote relation: one row per (symbol, trading day) with
/// `Low ≤ Open, Close ≤ High`.
pub fn stock_like(rows: usize, seed: u64) -> Database {
    let mut rng = rng_from_seed(seed);
    let symbols = rows.div_ceil(50).max(1);
    let mut db = Database::new(stock_schema());
    let mut prices: Vec<f64> = (0..symbols).map(|_| rng.gen_range(10.0..200.0)).collect();
    for i in 0..rows {
        let s = i % symbols;
        let day = i / symbols;
        let open = cents(prices[s]);
        let close = cents((open * (1.0 + rng.gen_range(-0.03..0.03))).max(1.0));
        let high = cents(open.max(close) * (1.0 + rng.gen_range(0.0..0.02)));
        let low = cents(open.min(close) * (1.0 - rng.gen_range(0.0..0.02)));
        prices[s] = close;
        let values = vec![
            Value::text(format!("S{s:02}")),
            Value::text(format!("2016-{:02}-{:02}", 1 + day / 28, 1 + day % 28)),
            Value::num(open),
            Value::num(high),
            Value::num(low),
            Value::num(close),
            Value::num(rng.gen_range(1_000..1_000_000) as f64),
        ];
        db.push(Fact::new("Stock", values)).expect("fits the schema");
    }
    db
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::violations::satisfies;

    #[test]
    fn generated_datasets_are_clean() {
        let a = airport_like(300, 1);
        assert!(satisfies(&a, &airport_constraints(a.schema())).unwrap());
        let s = stock_like(300, 1);
        assert!(satisfies(&s, &stock_constraints(s.schema())).unwrap());
        assert_eq!(a, airport_like(300, 1));
    }

    #[test]
    fn script_turns_clean_example_into_first_noisy_copy() {
        assert_eq!(airport_d0_to_d1().apply(&airport_example(0)), airport_example(1));
    }
}
