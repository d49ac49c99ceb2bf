use bbqcert_core::chsh::{gisin_peres_s_max, s_max_two_qubit};
use bbqcert_core::qcore::random::*;
use bbqcert_core::qcore::*;
use bbqcert_core::statecert::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qubit_bound_holds(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(&[2, 2], rank, &mut rng);
        let s = s_max_two_qubit(&rho).unwrap();
        prop_assume!(s >= 2.0);
        let f = f_opt_local_unitaries(&rho, 16, seed).unwrap().value;
        prop_assert!(f >= bound_f_my_qubit(s).unwrap() - 1e-6);
    }

    #[test]
    fn extraction_equals_formula(seed in any::<u64>(), da in 2usize..=6, db in 2usize..=6) {
        let mut rng = rng_from_seed(seed);
        let psi = random_pure(&[da, db], &mut rng);
        let f = extract_lo_pure(&psi).unwrap().2;
        prop_assert!((f - f_my_pure(&schmidt(&psi).unwrap().coefficients)).abs() < 1e-9);
    }

    #[test]
    fn pure_measures_are_ordered(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = rng_from_seed(seed);
        let psi = random_pure(&[d, d], &mut rng);
        let coeffs = schmidt(&psi).unwrap().coefficients;
        let f_my = f_my_pure(&coeffs);
        let f_lo = extract_lo_pure(&psi).unwrap().2;
        prop_assert!(f_my <= f_lo + 1e-9);
        // Pure-state values meet every bound at the Gisin-Peres value.
        let s = gisin_peres_s_max(&coeffs).unwrap();
        prop_assert!(f_lo >= bound_f_lo(s).unwrap() - 1e-9);
    }

    #[test]
    fn bounds_are_monotone(s in 2.0f64..2.82) {
        for b in [bound_f_my_qubit, bound_f_lo, bound_f_locc] {
            prop_assert!(b(s + 0.005).unwrap() >= b(s).unwrap());
        }
    }
}
