use bbqcert_core::chsh::*;
use bbqcert_core::diqkd::f_of_s;
use bbqcert_core::qcore::random::*;
use bbqcert_core::qcore::*;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimizer_never_beats_horodecki(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(&[2, 2], rank, &mut rng);
        let opt = optimize_s(&rho, 4, seed).unwrap();
        prop_assert!(opt.value.s <= s_max_two_qubit(&rho).unwrap() + 1e-6);
    }

    #[test]
    fn chsh_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(&[2, 3], 3, &mut rng);
        let oa: Vec<_> = (0..2).map(|_| random_dichotomic(2, &mut rng)).collect();
        let ob: Vec<_> = (0..2).map(|_| random_dichotomic(3, &mut rng)).collect();
        let exp = Experiment::new(rho.clone(), oa.clone(), ob.clone()).unwrap();
        let (u, v) = (haar_unitary(2, &mut rng), haar_unitary(3, &mut rng));
        let uv = bbqcert_core::qcore::linalg::kron(&u, &v);
        let rotated = Experiment::new(
            rho.evolve(&uv).unwrap(),
            oa.iter().map(|o| o.conjugate_by(&u).unwrap()).collect(),
            ob.iter().map(|o| o.conjugate_by(&v).unwrap()).collect(),
        )
        .unwrap();
        let (s0, s1) = (chsh_value(&exp).unwrap().s, chsh_value(&rotated).unwrap().s);
        prop_assert!((s0 - s1).abs() < 1e-10);
    }

    #[test]
    fn gisin_peres_measurements_reach_their_value(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = rng_from_seed(seed);
        let psi = random_pure(&[d, d], &mut rng);
        let coeffs = schmidt(&psi).unwrap().coefficients;
        let s = chsh_value(&gisin_peres_experiment(&psi).unwrap()).unwrap().s;
        prop_assert!((s - gisin_peres_s_max(&coeffs).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bell_diagonal_matches_horodecki(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let mut l: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
        let t: f64 = l.iter().sum();
        l.iter_mut().for_each(|x| *x /= t);
        let spec = BellSpectrum::new(l).unwrap();
        let h = s_max_two_qubit(&spec.state()).unwrap();
        prop_assert!((s_max_bell_diagonal(&spec) - h).abs() < 1e-10);
    }
}

#[test]
fn qubit_bound_is_concave() {
    let n = ((TSIRELSON - 2.0) / 1e-3) as usize;
    for k in 1..n {
        let s = 2.0 + k as f64 * 1e-3;
        let second = f_of_s(s + 1e-3).unwrap() - 2.0 * f_of_s(s).unwrap() + f_of_s(s - 1e-3).unwrap();
        assert!(second <= 1e-15, "s = {s}");
    }
}

#[test]
fn s_and_p_convert() {
    let v = ChshValue::from_s(TSIRELSON);
    assert!((v.p - (std::f64::consts::PI / 8.0).cos().powi(2)).abs() < 1e-15);
}
