use bbqcert_core::qcore::linalg::*;
use bbqcert_core::qcore::random::*;
use bbqcert_core::qcore::*;
use bbqcert_core::selftest::*;
use bbqcert_core::simmap::*;
use proptest::prelude::*;
use rand::Rng;

fn bloch(o: &Observable) -> [f64; 3] {
    let m = o.matrix();
    [pauli_x(), pauli_y(), pauli_z()].map(|p| (m * p).trace().re / 2.0)
}

/// Rotate a qubit observable's Bloch vector by eps towards a random
/// perpendicular direction.
fn perturb<R: Rng>(o: &Observable, eps: f64, rng: &mut R) -> Observable {
    let n = bloch(o);
    let mut m: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>() - 0.5);
    let dot: f64 = (0..3).map(|i| m[i] * n[i]).sum();
    (0..3).for_each(|i| m[i] -= dot * n[i]);
    let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v = std::array::from_fn(|i| eps.cos() * n[i] + eps.sin() * m[i] / norm);
    Observable::from_vector(v).unwrap()
}

fn conj_params(a: f64, phase: f64, frac: f64) -> ConjSimParams {
    ConjSimParams::new(a, C64::from_polar(frac * (a * (1.0 - a)).sqrt(), phase)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn passing_simulations_extract_epr(a in 0.0f64..=1.0, phase in 0.0f64..6.3, frac in 0.0f64..=1.0) {
        let exp = conj_simulate_experiment(&mayers_yao_reference(), conj_params(a, phase, frac)).unwrap();
        let rep = my_check_experiment(&exp, 1e-10).unwrap();
        prop_assert!(rep.pass);
        prop_assert!(rep.anticommutator_a.unwrap() < 1e-10 && rep.anticommutator_b.unwrap() < 1e-10);
        prop_assert!(swap_isometry(&exp).unwrap().fidelity_epr >= 1.0 - 1e-8);
    }

    #[test]
    fn isometry_fidelity_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let base = real_simulate_experiment(&mayers_yao_reference()).unwrap();
        let f0 = swap_isometry(&base).unwrap().fidelity_epr;
        let (da, db) = (base.state().dims()[0], base.state().dims()[1]);
        let (u, v) = (haar_unitary(da, &mut rng), haar_unitary(db, &mut rng));
        let rotated = Experiment::new(
            base.state().evolve(&kron(&u, &v)).unwrap(),
            base.observables_a().iter().map(|o| o.conjugate_by(&u).unwrap()).collect(),
            base.observables_b().iter().map(|o| o.conjugate_by(&v).unwrap()).collect(),
        )
        .unwrap();
        prop_assert!((swap_isometry(&rotated).unwrap().fidelity_epr - f0).abs() < 1e-10);
    }

    #[test]
    fn extended_simulations_pass(a in 0.0f64..=1.0, phase in 0.0f64..6.3, frac in 0.0f64..=1.0) {
        let exp = conj_simulate_experiment(&extended_reference(), conj_params(a, phase, frac)).unwrap();
        prop_assert!(ext_my_check(&exp, 1e-10).unwrap().pass);
    }

    #[test]
    fn honest_real_gates_pass(theta in 0.0f64..6.3) {
        let (c_, s) = (theta.cos(), theta.sin());
        let g = real_matrix(2, &[c_, -s, s, c_]);
        let [e1, e2, e3] = gate_test_experiments(&g, &g, 1).unwrap();
        let rep = gate_test(&e1, &e2, &e3, &g, 1e-9).unwrap();
        prop_assert!(rep.pass && rep.choi_distance <= 1e-9);
    }
}

#[test]
fn real_simulation_of_extended_reference_passes() {
    let exp = real_simulate_experiment(&extended_reference()).unwrap();
    assert!(ext_my_check(&exp, 1e-10).unwrap().pass);
}

#[test]
fn perturbed_extended_observables_fail() {
    let mut rng = rng_from_seed(99);
    let r = extended_reference();
    for _ in 0..50 {
        let mut oa = r.observables_a().to_vec();
        let mut ob = r.observables_b().to_vec();
        let k = rng.random_range(0..6);
        if rng.random::<bool>() {
            oa[k] = perturb(&oa[k], 0.05, &mut rng);
        } else {
            ob[k] = perturb(&ob[k], 0.05, &mut rng);
        }
        let exp = Experiment::new(r.state().clone(), oa, ob).unwrap();
        let rep = ext_my_check(&exp, 1e-10).unwrap();
        let worst = rep.base_reports.iter().map(|b| b.max_residual()).fold(0.0, f64::max);
        assert!(!rep.pass && worst > 1e-3, "worst residual {worst}");
    }
}
