use std::time::Instant;

use incon_core::datasets::{airport_constraints, airport_d0_to_d1, airport_example};
use incon_core::measures::{delta, evaluate_all, i_min_violations, MeasureConfig, MeasureKind};
use incon_core::repair::{CostModel, RepairOp};
use incon_core::violations::{conflict_hypergraph, enumerate_mi};
use incon_core::RecordId;

const KINDS: [MeasureKind; 7] = [
    MeasureKind::Drastic,
    MeasureKind::MinRepairSubset,
    MeasureKind::MinRepairUpdate,
    MeasureKind::MICount,
    MeasureKind::Problematic,
    MeasureKind::MaxConsistent,
    MeasureKind::MinRepairSubsetLin,
];

fn unit() -> MeasureConfig {
    MeasureConfig {
        costs: CostModel::unit(),
        ..MeasureConfig::default()
    }
}

#[test]
fn measure_table() {
    let start = Instant::now();
    let expected = [
        [0.0; 7],
        [1.0, 3.0, 4.0, 7.0, 5.0, 3.0, 2.5],
        [1.0, 2.0, 3.0, 5.0, 4.0, 2.0, 2.0],
    ];
    for (v, row) in expected.iter().enumerate() {
        let db = airport_example(v as u8);
        let sigma = airport_constraints(db.schema());
        let got = evaluate_all(&KINDS, &db, &sigma, &unit()).unwrap();
        for ((k, e), g) in KINDS.iter().zip(row).zip(got) {
            let g = g.unwrap();
            assert!(g.exact, "D{v} {k}");
            assert!((g.value - e).abs() <= 1e-6, "D{v} {k}: expected {e}, got {}", g.value);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "{:?}", start.elapsed());
}

#[test]
fn conflicts_of_the_first_noisy_copy() {
    let db = airport_example(1);
    let sigma = airport_constraints(db.schema());
    let mi: Vec<Vec<u64>> = enumerate_mi(&db, &sigma)
        .unwrap()
        .into_iter()
        .map(|m| m.ids.iter().map(|i| i.0).collect())
        .collect();
    assert_eq!(mi, vec![vec![1, 5], vec![2, 3], vec![2, 4], vec![2, 5], vec![3, 4], vec![3, 5], vec![4, 5]]);
    assert!(conflict_hypergraph(&db, &sigma).unwrap().pairwise_only);
    assert_eq!(i_min_violations(&db, &sigma).unwrap().value, 9.0);
}

#[test]
fn deleting_the_fifth_fact() {
    let db = airport_example(1);
    let sigma = airport_constraints(db.schema());
    let op = RepairOp::Delete { id: RecordId(5) };
    assert_eq!(delta(MeasureKind::MICount, &sigma, &op, &db, &unit()).unwrap(), 4.0);
    assert_eq!(delta(MeasureKind::MinRepairSubset, &sigma, &op, &db, &unit()).unwrap(), 1.0);
    let noop = RepairOp::Delete { id: RecordId(99) };
    assert_eq!(delta(MeasureKind::MICount, &sigma, &noop, &db, &unit()).unwrap(), 0.0);
}

#[test]
fn clean_copy_becomes_noisy_copy() {
    assert_eq!(airport_d0_to_d1().apply(&airport_example(0)), airport_example(1));
}
