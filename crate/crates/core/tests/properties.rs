use levy_fock::exponent::{convert, Convention, LevyTriplet};
use levy_fock::gns::{kernel, kernel_via_exponent};
use levy_fock::measure::{Density, LevyMeasure};
use levy_fock::posdef::{conditional_matrix, gram_with, psd_check, TripletCharFn, TripletExponent};
use levy_fock::{fock, grid};
use num_complex::Complex64;
use proptest::prelude::*;

fn finite_measure() -> impl Strategy<Value = LevyMeasure> {
    (
        prop::collection::btree_map(2i32..20, 0.05f64..0.7, 0..=3),
        any::<bool>(),
        1.1f64..1.9,
    )
        .prop_map(|(atoms, dense, hi)| {
            let atoms: Vec<(f64, f64)> = atoms
                .into_iter()
                .map(|(k, w)| (if k % 2 == 0 { 0.1 * k as f64 } else { -0.1 * k as f64 }, w))
                .collect();
            let nu = LevyMeasure::from_atoms(atoms);
            if dense {
                nu.with_density(Density::Uniform {
                    lo: 0.3,
                    hi,
                    height: 0.4,
                })
            } else {
                nu
            }
        })
}

fn triplet() -> impl Strategy<Value = LevyTriplet> {
    (-1.0f64..1.0, 0.0f64..2.0, finite_measure(), 0usize..3).prop_map(|(b, a, nu, c)| {
        LevyTriplet::new(b, a, nu, Convention::ALL[c]).expect("finite measures are admissible everywhere")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kernel_is_hermitian(trip in triplet(), s in -4.0f64..4.0, t in -4.0f64..4.0) {
        let k = kernel(&trip, s, t).unwrap();
        let kt = kernel(&trip, t, s).unwrap();
        prop_assert!((k - kt.conj()).norm() <= 1e-12);
        prop_assert!(kernel(&trip, s, s).unwrap().re >= 0.0);
    }

    #[test]
    fn kernel_ignores_drift(trip in triplet(), b in -3.0f64..3.0, s in -4.0f64..4.0, t in -4.0f64..4.0) {
        prop_assert_eq!(kernel(&trip, s, t).unwrap(), kernel(&trip.with_drift(b), s, t).unwrap());
    }

    #[test]
    fn closed_form_kernel_matches_exponent_route(trip in triplet(), s in -4.0f64..4.0, t in -4.0f64..4.0) {
        let closed = kernel(&trip, s, t).unwrap();
        let via = kernel_via_exponent(&trip, s, t).unwrap();
        prop_assert!((closed - via).norm() <= 1e-9, "{closed} vs {via}");
    }

    #[test]
    fn conversions_round_trip(trip in triplet(), to in 0usize..3, t in -5.0f64..5.0) {
        let there = convert(&trip, Convention::ALL[to]).unwrap();
        let back = convert(&there, trip.convention()).unwrap();
        prop_assert!((back.drift() - trip.drift()).abs() <= 1e-10);
        let (f, g) = (trip.exponent(t).unwrap(), there.exponent(t).unwrap());
        prop_assert!((f - g).norm() <= 1e-9 * f.norm().max(1.0));
    }

    #[test]
    fn characteristic_functions_are_positive_definite(trip in triplet(), n in 17usize..34) {
        let points = grid::linspace(-4.0, 4.0, n);
        let m = gram_with(&points, &TripletCharFn(&trip), None).unwrap();
        prop_assert!(psd_check(&m, 1e-8).unwrap().is_psd);
        let c = conditional_matrix(&points, &TripletExponent(&trip)).unwrap();
        prop_assert!(psd_check(&c, 1e-8).unwrap().is_psd);
    }

    #[test]
    fn coherent_series_stays_within_its_bound(
        psi in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..4),
        phi_seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        degree in prop::sample::select(vec![4usize, 8, 16]),
    ) {
        let psi: Vec<Complex64> = psi.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        let phi: Vec<Complex64> = phi_seed[..psi.len()].iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let exact = levy_fock::gns::inner(&psi, &phi).exp();
        let c = fock::coherent_inner(&psi, &phi, degree).unwrap();
        prop_assert!((c.value - exact).norm() <= c.bound, "{} vs {} bound {}", c.value, exact, c.bound);
    }
}
