//! Triplet to cocycle to Fock space, and sampling, end to end.

use levy_fock::exponent::{Convention, LevyTriplet, TripletSpec};
use levy_fock::fock::{coherent_gram_check, representation_residual, vacuum_expectation, weyl_unitarity_residual};
use levy_fock::gns::{coboundary_residual, kernel_matrix_from_triplet, realize_cocycle, shift_covariance_residual};
use levy_fock::grid;
use levy_fock::posdef::{infinite_divisibility_check, GridFunction};
use levy_fock::sampler::{ecf_compare, sample_paths, PathSpec};

fn mixed() -> LevyTriplet {
    TripletSpec::from_json(
        r#"{ "b": 0.3, "a": 0.5, "convention": "levy", "atoms": [[1.0, 0.5], [-0.5, 0.7]],
             "density": { "family": "power", "exponent": 1.5, "cutoff": 1.0 } }"#,
    )
    .unwrap()
    .build()
    .unwrap()
}

#[test]
fn cocycle_realization_reproduces_the_kernel() {
    let trip = mixed();
    let points = grid::arithmetic(-2.0, 2.0, 0.5).unwrap();
    let k = kernel_matrix_from_triplet(&trip, &points).unwrap();
    let real = realize_cocycle(&k, 1e-10).unwrap();
    assert!(real.gram_error(&k) <= 1e-8 * k.max_abs());
    assert!(shift_covariance_residual(&trip, &points, 0.5).unwrap() <= 1e-8 * (1.0 + k.max_abs()));
    let check = coherent_gram_check(&real, 10, 200_000).unwrap();
    assert!(check.passed, "{check:?}");
}

#[test]
fn diffusion_keeps_the_cocycle_away_from_coboundaries() {
    let trip = mixed();
    let real = realize_cocycle(&kernel_matrix_from_triplet(&trip, &[0.0, 1.0, 2.0, 3.0]).unwrap(), 1e-10).unwrap();
    assert!(coboundary_residual(&real, &trip).unwrap().normalized > 0.1);
}

#[test]
fn weyl_operators_act_consistently() {
    let trip = mixed();
    let points = grid::arithmetic(-1.0, 1.0, 0.5).unwrap();
    for t in [-2.5, 0.3, 4.0] {
        assert!((vacuum_expectation(&trip, t).unwrap() - trip.char_fn(t).unwrap()).norm() <= 1e-9);
    }
    assert!(weyl_unitarity_residual(&trip, &points, 0.7).unwrap().relative() <= 1e-7);
    assert!(representation_residual(&trip, &points, 0.4, -0.9).unwrap().relative() <= 1e-7);
}

#[test]
fn cauchy_like_table_is_divisible() {
    let points = grid::arithmetic(-3.0, 3.0, 0.25).unwrap();
    let table = GridFunction::from_fn(points, |t| num_complex::Complex64::new((-t.abs()).exp(), 0.0)).unwrap();
    let report = infinite_divisibility_check(&table, 16, 1e-8).unwrap();
    assert!(report.passed);
    assert_eq!(report.roots.len(), 16);
}

#[test]
fn sampling_is_reproducible_and_matches_the_law() {
    let trip = LevyTriplet::new(
        0.2,
        0.3,
        levy_fock::measure::LevyMeasure::from_atoms([(0.8, 1.5)]),
        Convention::Levy,
    )
    .unwrap();
    let spec = PathSpec {
        horizon: 1.0,
        steps: 4,
        paths: 3,
        seed: 11,
        delta: 0.01,
    };
    assert_eq!(sample_paths(&trip, &spec).unwrap(), sample_paths(&trip, &spec).unwrap());
    let spec = PathSpec { paths: 40_000, ..spec };
    let cmp = ecf_compare(&trip, &spec, &grid::arithmetic(-3.0, 3.0, 0.3).unwrap(), 5.0).unwrap();
    assert!(cmp.passed, "{} > {}", cmp.max_deviation, cmp.threshold);
}
