use incon_core::solver::{solve_ilp, solve_ilp_with, solve_lp, solve_lp_simplex, IlpOptions, LinearProgram, LpStatus};
use incon_core::SolverError;
use proptest::prelude::*;

fn brute_half(lp: &LinearProgram) -> f64 {
    let n = lp.num_vars;
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let d = c % 3;
                c /= 3;
                d as f64 / 2.0
            })
            .collect();
        if lp.is_feasible(&x) {
            best = best.min(lp.objective.iter().zip(&x).map(|(a, b)| a * b).sum());
        }
    }
    best
}

fn brute_int(lp: &LinearProgram) -> f64 {
    let n = lp.num_vars;
    (0u32..1 << n)
        .map(|m| (0..n).map(|i| f64::from(m >> i & 1)).collect::<Vec<_>>())
        .filter(|x| lp.is_feasible(x))
        .map(|x| lp.objective.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn program(max_row: usize) -> impl Strategy<Value = LinearProgram> {
    (2usize..=9).prop_flat_map(move |n| {
        let costs = prop::collection::vec(1u8..=4, n);
        let rows = prop::collection::vec(prop::collection::btree_set(0..n, 1..=max_row), 1..=12);
        (costs, rows).prop_map(move |(c, r)| {
            let rows = r.into_iter().map(|s| s.into_iter().collect()).collect();
            LinearProgram::new(n, c.into_iter().map(f64::from).collect(), rows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pairwise_relaxation_is_half_integral(lp in program(2)) {
        let flow = solve_lp(&lp).unwrap();
        let simplex = solve_lp_simplex(&lp).unwrap();
        prop_assert_eq!(flow.status, LpStatus::Optimal);
        prop_assert!((flow.value - brute_half(&lp)).abs() < 1e-6);
        prop_assert!((simplex.value - flow.value).abs() < 1e-6);
        prop_assert!(lp.is_feasible(&flow.assignment));
        prop_assert!(lp.is_feasible(&simplex.assignment));
    }

    #[test]
    fn integer_optimum_matches_enumeration(lp in program(3)) {
        let ilp = solve_ilp(&lp).unwrap();
        prop_assert!((ilp.value - brute_int(&lp)).abs() < 1e-9);
        prop_assert!(ilp.assignment.iter().all(|&x| x == 0.0 || x == 1.0));
        prop_assert!(lp.is_feasible(&ilp.assignment));
        let lin = solve_lp(&lp).unwrap();
        prop_assert!(lin.value <= ilp.value + 1e-6);
        prop_assert!(ilp.value <= lp.max_row_len() as f64 * lin.value + 1e-6);
    }

    #[test]
    fn text_format_round_trips(lp in program(3)) {
        prop_assert_eq!(LinearProgram::from_text(&lp.to_text()).unwrap(), lp);
    }
}

#[test]
fn node_budget_reports_bounds() {
    // odd cycles of triples keep the relaxation fractional
    let n = 15;
    let rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n, (i + 2) % n]).collect();
    let lp = LinearProgram::new(n, vec![1.0; n], rows).unwrap();
    let exact = solve_ilp(&lp).unwrap();
    assert_eq!(exact.value, 5.0);
    match solve_ilp_with(&lp, IlpOptions { node_budget: 1 }) {
        Err(SolverError::NodeBudgetExceeded { lower, upper, .. }) => {
            assert!(lower <= 5.0 && upper >= 5.0);
        }
        Ok(sol) => assert_eq!(sol.value, 5.0),
        Err(e) => panic!("{e}"),
    }
}
