use bbqcert_core::qcore::linalg::*;
use bbqcert_core::qcore::random::*;
use bbqcert_core::qcore::*;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn tensor_is_associative_and_bilinear(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 2, &mut rng);
        let b2 = ginibre(3, 2, &mut rng);
        let c_ = ginibre(2, 3, &mut rng);
        let left = kron(&kron(&a, &b), &c_);
        let right = kron(&a, &kron(&b, &c_));
        prop_assert!(max_abs_diff(&left, &right) < 1e-12);
        let s = gaussian_complex(&mut rng);
        let lin = kron(&a, &(&b * s + &b2));
        let sum = kron(&a, &b) * s + kron(&a, &b2);
        prop_assert!(max_abs_diff(&lin, &sum) < 1e-12);
    }

    #[test]
    fn statistics_are_valid(seed in any::<u64>(), da in 2usize..=4, db in 2usize..=4, rank in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(&[da, db], rank.min(da * db), &mut rng);
        let oa = (0..3).map(|_| random_dichotomic(da, &mut rng)).collect();
        let ob = (0..2).map(|_| random_dichotomic(db, &mut rng)).collect();
        let exp = Experiment::new(rho, oa, ob).unwrap();
        let st = statistics_of(&exp).unwrap();
        prop_assert!(st.validate(&Tolerances::default()).is_ok());
    }

    #[test]
    fn fidelity_symmetric_and_unitarily_invariant(seed in any::<u64>(), r1 in 1usize..=4, r2 in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(&[4], r1, &mut rng);
        let sigma = random_density(&[4], r2, &mut rng);
        let f = fidelity(&rho, &sigma).unwrap();
        prop_assert!((f - fidelity(&sigma, &rho).unwrap()).abs() < 1e-10);
        let u = haar_unitary(4, &mut rng);
        let g = fidelity(&rho.evolve(&u).unwrap(), &sigma.evolve(&u).unwrap()).unwrap();
        prop_assert!((f - g).abs() < 1e-10);
    }

    #[test]
    fn choi_of_composition_matches(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let first = ChannelKraus::new(random_kraus(2, 3, 2, &mut rng)).unwrap();
        let second = ChannelKraus::new(random_kraus(3, 2, 3, &mut rng)).unwrap();
        let composed = second.compose(&first).unwrap().choi();
        for _ in 0..20 {
            let rho = random_density(&[2], 2, &mut rng);
            let direct = second.apply(&first.apply(rho.matrix()).unwrap()).unwrap();
            let via = composed.apply(rho.matrix()).unwrap();
            prop_assert!(max_abs_diff(&direct, &via) < 1e-10);
        }
    }

    #[test]
    fn choi_traces_to_identity(seed in any::<u64>(), din in 1usize..=3, dout in 1usize..=3, n in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let ch = ChannelKraus::new(random_kraus(din, dout, n.max(din), &mut rng)).unwrap();
        let j = ch.choi();
        // Output factor first; tracing it leaves the identity on the input.
        let red = partial_trace_keep(j.matrix(), &[dout, din], &[1]);
        prop_assert!(max_abs_diff(&red, &identity(din)) < 1e-10);
    }
}

#[test]
fn site_a_is_the_slow_factor() {
    let psi = PureState::basis(vec![2, 3], 3).unwrap();
    let rho = psi.density().partial_trace(&[0]).unwrap();
    // Index 3 = 1 * 3 + 0: A in |1>.
    assert!((rho.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
}
