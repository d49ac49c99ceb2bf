use bbqcert_core::hdiv::*;
use proptest::prelude::*;

fn quat() -> impl Strategy<Value = Quaternion> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c, d)| Quaternion::new(a, b, c, d))
}

proptest! {
    #[test]
    fn multiplication_is_associative(p in quat(), q in quat(), r in quat()) {
        prop_assert!(((p * q) * r - p * (q * r)).norm() < 1e-12);
    }

    #[test]
    fn norm_is_multiplicative(p in quat(), q in quat()) {
        prop_assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-12);
        prop_assert!((qconj(qmul(p, q)) - qconj(q) * qconj(p)).norm() < 1e-12);
    }

    #[test]
    fn box_wins_for_any_seed(seed in any::<u64>(), a in 0u8..2, b in 0u8..2) {
        let mut rng = bbqcert_core::qcore::random::rng_from_seed(seed);
        let t = nonlocal_box_run(a, b, &mut rng);
        prop_assert_eq!(t.x ^ t.y, a & b);
    }
}

#[test]
fn matrix_dagger_reverses_products() {
    let m = QuatMatrix::new(2, 2, vec![Quaternion::I, Quaternion::J, Quaternion::K, Quaternion::ONE]).unwrap();
    let n = QuatMatrix::new(2, 2, vec![Quaternion::J, Quaternion::ONE, Quaternion::I, Quaternion::K]).unwrap();
    let lhs = qmat_dagger(&qmat_mul(&m, &n).unwrap());
    let rhs = qmat_mul(&qmat_dagger(&n), &qmat_dagger(&m)).unwrap();
    assert_eq!(lhs, rhs);
    assert!(qmat_mul(&m, &QuatMatrix::zeros(3, 1)).is_err());
}
