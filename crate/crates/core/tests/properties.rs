use incon_core::csvio::{read_csv, relation_to_string, CsvOptions};
use incon_core::harness::random_dc_instance;
use incon_core::measures::{i_r_lin, i_r_subset, measure, MeasureConfig, MeasureKind};
use incon_core::model::{subset_of, Attribute, Signature};
use incon_core::repair::{apply_op, changes, CostModel, RepairOp};
use incon_core::{Database, Fact, RecordId, Schema, Value, ValueKind};
use proptest::prelude::*;

fn text_value() -> impl Strategy<Value = String> {
    prop::string::string_regex("[a-z ,\"']{0,8}").unwrap()
}

fn mixed_db() -> impl Strategy<Value = Database> {
    prop::collection::vec((text_value(), -1000i64..1000, 1u8..5), 0..12).prop_map(|rows| {
        let sig = Signature::new(vec![Attribute::new("Name", ValueKind::Text), Attribute::new("Score", ValueKind::Numeric)]).unwrap();
        let mut db = Database::new(Schema::new().with_relation("R", sig).unwrap());
        for (i, (t, x, c)) in rows.into_iter().enumerate() {
            let id = RecordId(i as u64 * 3 + 1);
            db.insert(id, Fact::new("R", vec![Value::text(t), Value::num(x as f64 / 4.0)])).unwrap();
            db.set_cost(id, f64::from(c)).unwrap();
        }
        db
    })
}

fn dc_instance() -> impl Strategy<Value = (Database, incon_core::ConstraintSet)> {
    (any::<u64>(), 2usize..=9).prop_map(|(seed, rows)| {
        let inst = random_dc_instance(rows, 3, seed);
        (inst.db, inst.sigma)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn csv_round_trip(db in mixed_db()) {
        let text = relation_to_string(&db, "R").unwrap();
        let back = read_csv(text.as_bytes(), db.schema(), &CsvOptions::default()).unwrap();
        prop_assert_eq!(back, db);
    }

    #[test]
    fn subset_is_a_partial_order((db, _) in dc_instance(), cut in 0usize..10) {
        let ids: Vec<RecordId> = db.ids().collect();
        let small = db.restrict(ids.iter().take(cut));
        let smaller = small.restrict(ids.iter().take(cut / 2));
        prop_assert!(subset_of(&db, &db).unwrap());
        prop_assert!(subset_of(&small, &db).unwrap());
        prop_assert!(subset_of(&smaller, &small).unwrap());
        prop_assert!(subset_of(&smaller, &db).unwrap());
        if subset_of(&db, &small).unwrap() {
            prop_assert_eq!(&db, &small);
        }
    }

    #[test]
    fn deletion_cost_is_zero_exactly_on_no_ops((db, _) in dc_instance(), id in 0u64..12) {
        let op = RepairOp::Delete { id: RecordId(id) };
        let costs = CostModel::default();
        prop_assert_eq!(costs.cost(&op, &db) == 0.0, !changes(&db, &op));
        prop_assert!(subset_of(&apply_op(&db, &op), &db).unwrap());
    }

    #[test]
    fn deletions_never_raise_the_repair_measures((db, sigma) in dc_instance(), pick in 0usize..10) {
        let Some(id) = db.ids().nth(pick) else { return Ok(()) };
        let after = apply_op(&db, &RepairOp::Delete { id });
        let costs = CostModel::default();
        prop_assert!(i_r_subset(&after, &sigma, &costs).unwrap().value <= i_r_subset(&db, &sigma, &costs).unwrap().value + 1e-9);
        prop_assert!(i_r_lin(&after, &sigma, &costs).unwrap().value <= i_r_lin(&db, &sigma, &costs).unwrap().value + 1e-9);
    }

    #[test]
    fn measures_vanish_on_consistent_data((db, sigma) in dc_instance()) {
        let cfg = MeasureConfig::default();
        let consistent = measure(MeasureKind::Drastic, &db, &sigma, &cfg).unwrap().value == 0.0;
        for k in [MeasureKind::MICount, MeasureKind::Problematic, MeasureKind::MinRepairSubset, MeasureKind::MinRepairSubsetLin, MeasureKind::MinViolations] {
            let v = measure(k, &db, &sigma, &cfg).unwrap().value;
            prop_assert_eq!(v == 0.0, consistent, "{}", k);
        }
    }
}
