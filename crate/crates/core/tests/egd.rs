use incon_core::egd::{classify_egd, egd_min_repair, EgdShape};
use incon_core::measures::i_r_subset;
use incon_core::noise::rng_from_seed;
use incon_core::oracle::{binary_egds, random_binary_db};
use incon_core::repair::CostModel;
use incon_core::ConstraintSet;
use rand::Rng;

#[test]
fn only_chained_self_joins_are_hard() {
    let egds = binary_egds();
    assert!(egds.len() > 100);
    for (dc, hard) in &egds {
        let shape = classify_egd(dc);
        assert_ne!(shape, EgdShape::NotAnEgd, "{dc}");
        assert_eq!(!shape.is_tractable(), *hard, "{dc} classified {shape}");
    }
}

#[test]
fn tractable_shapes_match_the_ilp() {
    let mut per_shape: std::collections::BTreeMap<String, usize> = Default::default();
    let mut rng = rng_from_seed(17);
    for (dc, hard) in binary_egds() {
        if hard {
            continue;
        }
        let sigma = ConstraintSet::new(vec![dc.clone()]).unwrap();
        for _ in 0..20 {
            let rows = rng.gen_range(2..=12);
            let db = random_binary_db(&mut rng, rows, 3);
            let fast = egd_min_repair(&db, &dc, |id| db.cost_of(id)).unwrap();
            let ilp = i_r_subset(&db, &sigma, &CostModel::default()).unwrap();
            assert!((fast.cost - ilp.value).abs() < 1e-9, "{dc}: {} vs {}\n{db:?}", fast.cost, ilp.value);
            let rest: Vec<_> = db.ids().filter(|i| !fast.deleted.contains(i)).collect();
            assert!(incon_core::violations::satisfies(&db.restrict(rest.iter()), &sigma).unwrap());
            *per_shape.entry(classify_egd(&dc).to_string()).or_default() += 1;
        }
    }
    for (shape, n) in &per_shape {
        assert!(*n >= 50, "{shape}: {n} instances");
    }
    assert!(per_shape.len() >= 4, "{per_shape:?}");
}
