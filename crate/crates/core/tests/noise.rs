use incon_core::datasets::{airport_constraints, airport_like, stock_constraints, stock_like};
use incon_core::noise::{add_noise, rng_from_seed, rnoise_run, zipf_pick, NoiseConfig, RNoise};
use incon_core::violations::satisfies;
use incon_core::Value;

#[test]
fn uniform_when_beta_is_zero() {
    let values: Vec<Value> = (0..10).map(|i| Value::from(i as i64)).collect();
    let mut rng = rng_from_seed(3);
    let mut counts = [0usize; 10];
    let draws = 10_000;
    for _ in 0..draws {
        let v = zipf_pick(&values, 0.0, &mut rng);
        counts[v.as_f64().unwrap() as usize] += 1;
    }
    let e = draws as f64 / 10.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 9 degrees of freedom: mean 9, sd sqrt(18)
    assert!(chi2 < 9.0 + 3.0 * 18f64.sqrt(), "chi2 = {chi2}");
}

#[test]
fn skew_favours_early_values() {
    let values: Vec<Value> = (0..10).map(|i| Value::from(i as i64)).collect();
    let mut rng = rng_from_seed(4);
    let first = (0..5000).filter(|_| zipf_pick(&values, 2.0, &mut rng) == &values[0]).count();
    assert!(first > 3000, "{first}");
}

#[test]
fn single_cell_from_the_active_domain() {
    let db = airport_like(50, 2);
    let sigma = airport_constraints(db.schema());
    let cells = 50 * 3;
    let alpha = 1.0 / cells as f64;
    let mut gen = RNoise::new(&db, &sigma, alpha, 1.0, 0.0).unwrap();
    assert_eq!(gen.total_steps(), 1);
    let mut cur = db.clone();
    let mut rng = rng_from_seed(1);
    gen.step(&mut cur, &mut rng).unwrap();
    assert!(gen.step(&mut cur, &mut rng).is_none());
    let diffs: Vec<(usize, Value)> = db
        .iter()
        .flat_map(|(id, f)| {
            let g = cur.get(id).unwrap();
            (0..f.values.len()).filter(move |&p| f.values[p] != g.values[p]).map(move |p| (p, g.values[p].clone()))
        })
        .collect();
    assert_eq!(diffs.len(), 1);
    let (pos, v) = &diffs[0];
    assert!(db.active_domain("Airport", *pos).contains(v));
}

#[test]
fn noise_is_seeded_and_dirties_the_data() {
    let db = stock_like(200, 5);
    let sigma = stock_constraints(db.schema());
    let a = add_noise(&db, &sigma, &NoiseConfig::conoise(20, 8)).unwrap();
    let b = add_noise(&db, &sigma, &NoiseConfig::conoise(20, 8)).unwrap();
    assert_eq!(a, b);
    assert!(!satisfies(&a, &sigma).unwrap());
    let run = rnoise_run(&db, &sigma, &NoiseConfig::rnoise(0.01, 1.0, 8)).unwrap();
    let cells = 200 * 6;
    assert_eq!(run.len(), (0.01 * cells as f64).ceil() as usize);
    assert_eq!(run, rnoise_run(&db, &sigma, &NoiseConfig::rnoise(0.01, 1.0, 8)).unwrap());
}
