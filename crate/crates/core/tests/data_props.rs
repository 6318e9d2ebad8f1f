mod common;

use std::collections::HashSet;

use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

use nnagg::data::{
    fit_normalizer, generate_dataset, monomials_up_to, split_dataset, Dataset, NoiseSpec,
    Polynomial, TaskKind, TestSize, DEFAULT_FEATURE_RANGE, NUM_VARS,
};
use nnagg::seed;

fn indexed(n: usize) -> Dataset {
    let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
    let y = Array2::from_shape_fn((n, 1), |(i, _)| (i % 2) as f64);
    Dataset::new("rows", x, y, TaskKind::Classification).unwrap()
}

#[test]
fn polynomial_matches_brute_force() {
    let mut rng = seed::rng(17);
    for case in 0..1000u64 {
        let degree = rng.random_range(1..=5);
        let p = Polynomial::generate(degree, case).unwrap();
        let x: Vec<f64> = (0..NUM_VARS).map(|_| rng.random_range(-3.0..3.0)).collect();
        let got = p.eval(&x).unwrap();
        let rel = common::relative_error(got, &common::exact_eval(&p, &x));
        assert!(rel < 1e-12, "case {case}: degree {degree}, value {got}, relative error {rel}");
    }
}

#[test]
fn monomial_counts_follow_binomials() {
    for d in 0..=6u32 {
        let n = common::binomial(NUM_VARS as u64 + d as u64, d as u64);
        assert_eq!(monomials_up_to(d).len() as u64, n);
    }
}

#[test]
fn wdbc_split_is_256_256_57() {
    let data = indexed(569);
    let split = split_dataset(&data, TestSize::Count(57), 2, 0).unwrap();
    let sizes: Vec<usize> = split.parts.iter().map(Dataset::len).collect();
    assert_eq!(sizes, [256, 256]);
    assert_eq!(split.test.len(), 57);
}

#[test]
fn noise_stays_within_two_n_d() {
    for level in [1.0, 2.0] {
        for degree in [2, 5] {
            let p = Polynomial::generate(degree, 3).unwrap();
            let data =
                generate_dataset(&p, 10_000, NoiseSpec::new(level), DEFAULT_FEATURE_RANGE, 4).unwrap();
            let bound = 2.0 * level * degree as f64;
            for (x, y) in data.features.rows().into_iter().zip(data.targets.column(0)) {
                let f = p.eval(x.as_slice().unwrap()).unwrap();
                assert!((y - f).abs() <= bound);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn split_conserves_and_separates_rows(
        n in 2usize..400,
        k in 1usize..6,
        frac in 0.05f64..0.5,
        s in any::<u64>(),
    ) {
        let data = indexed(n);
        let test = TestSize::Fraction(frac);
        let n_test = (frac * n as f64).ceil() as usize;
        prop_assume!(n_test < n && n - n_test >= k);
        let split = split_dataset(&data, test, k, s).unwrap();
        prop_assert_eq!(split.parts.len(), k);
        let mut seen = HashSet::new();
        let mut total = 0;
        for part in split.parts.iter().chain([&split.test]) {
            total += part.len();
            for (r, id) in part.row_ids.iter().enumerate() {
                prop_assert!(seen.insert(*id), "row {} appears twice", id);
                // features travel with their row
                prop_assert_eq!(part.features[[r, 0]], (*id * 2) as f64);
            }
        }
        prop_assert_eq!(total, n);
        prop_assert_eq!(split.test.len(), n_test);
        let sizes: Vec<usize> = split.parts.iter().map(Dataset::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn generation_is_deterministic(degree in 1u32..=5, s in any::<u64>(), level in 0.0f64..3.0) {
        let p = Polynomial::generate(degree, s).unwrap();
        let a = generate_dataset(&p, 50, NoiseSpec::new(level), DEFAULT_FEATURE_RANGE, s).unwrap();
        let b = generate_dataset(&p, 50, NoiseSpec::new(level), DEFAULT_FEATURE_RANGE, s).unwrap();
        prop_assert_eq!(&a.features, &b.features);
        prop_assert_eq!(&a.targets, &b.targets);
        prop_assert!(a.features.iter().all(|v| (-3.0..=3.0).contains(v)));
    }

    #[test]
    fn normalized_training_rows_land_in_unit_interval(s in any::<u64>(), n in 1usize..60) {
        let mut rng = seed::rng(s);
        let x = common::random_matrix(&mut rng, n, 4, -50.0, 50.0);
        let y = Array2::zeros((n, 1));
        let data = Dataset::new("d", x, y, TaskKind::Classification).unwrap();
        let scaled = fit_normalizer(&data).unwrap().apply(&data).unwrap();
        prop_assert!(scaled.features.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
