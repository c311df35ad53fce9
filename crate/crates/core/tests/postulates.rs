use incon_core::harness::{
    check_continuity, check_monotonicity_cases, check_positivity, check_progression_all, inconsistent_dc_instances,
    monotonicity_cases, random_suite, Verdict,
};
use incon_core::measures::{delta, MeasureConfig, MeasureKind};
use incon_core::repair::RepairOp;

#[test]
fn linear_relaxation_postulates_on_random_instances() {
    let cfg = MeasureConfig::default();
    let instances = inconsistent_dc_instances(500, 9, 3, 7);
    let kind = MeasureKind::MinRepairSubsetLin;
    let pos = check_positivity(kind, &instances, &cfg).unwrap();
    assert_eq!(pos.verdict, Verdict::HoldsOnSample, "{pos:?}");
    assert_eq!(pos.samples, 500);
    let cases = monotonicity_cases(&instances, 7);
    let mono = check_monotonicity_cases(kind, &cases, &cfg).unwrap();
    assert_eq!(mono.verdict, Verdict::HoldsOnSample, "{mono:?}");
    let prog = check_progression_all(kind, &instances, &cfg).unwrap();
    assert_eq!(prog.verdict, Verdict::HoldsOnSample, "{prog:?}");
}

#[test]
fn repair_measure_deletions_cost_at_least_their_effect() {
    let cfg = MeasureConfig::default();
    let mut checked = 0;
    for inst in inconsistent_dc_instances(100, 9, 3, 99) {
        for id in inst.db.ids() {
            let op = RepairOp::Delete { id };
            let d = delta(MeasureKind::MinRepairSubset, &inst.sigma, &op, &inst.db, &cfg).unwrap();
            assert!(d <= cfg.costs.cost(&op, &inst.db) + 1e-9, "{}: deleting {id} removes {d}", inst.name);
            checked += 1;
        }
    }
    assert!(checked >= 100);
}

#[test]
fn relaxation_continuity_within_the_arity_bound() {
    let cfg = MeasureConfig::default();
    let instances = inconsistent_dc_instances(40, 7, 3, 5);
    for one in instances.chunks(1) {
        let d = one[0].sigma.max_arity() as f64;
        let rep = check_continuity(MeasureKind::MinRepairSubsetLin, one, true, d, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::HoldsOnSample, "{rep:?}");
        let rep = check_continuity(MeasureKind::MinRepairSubset, one, true, 1.0, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::HoldsOnSample, "{rep:?}");
    }
}

#[test]
fn random_suite_agrees_with_theory() {
    let cfg = MeasureConfig::default();
    for kind in [MeasureKind::MinRepairSubsetLin, MeasureKind::MinRepairSubset] {
        for s in random_suite(kind, 60, 8, 3, &cfg).unwrap() {
            assert!(s.guaranteed);
            assert_eq!(s.report.verdict, Verdict::HoldsOnSample, "{kind}: {:?}", s.report);
        }
    }
    let d = random_suite(MeasureKind::Drastic, 60, 8, 3, &cfg).unwrap();
    assert!(d.iter().all(|s| s.consistent_with_theory()));
    assert!(d.iter().any(|s| s.report.verdict == Verdict::Violated));
}

#[test]
fn counting_measures_break_progression_somewhere() {
    let cfg = MeasureConfig::default();
    let instances = inconsistent_dc_instances(300, 8, 3, 11);
    let rep = check_progression_all(MeasureKind::MaxConsistent, &instances, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::Violated);
    assert!(rep.reverify(&cfg).unwrap());
}
