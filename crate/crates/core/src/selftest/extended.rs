use super::{lift_a, my_check, purified_on_a, MyReport};
use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::{schmidt, statistics_of, Experiment, Observable, PureState};
use crate::simmap::ConjSimParams;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug)]
pub struct ExtMyReport {
    /// Sub-checks on the role triples (X, Z, D), (X, Y, E) and (Y, Z, F).
    pub base_reports: [MyReport; 3],
    /// Weight and maximal coherence of the equivalent conjugation simulation.
    pub conj_params: ConjSimParams,
    pub pass: bool,
}

fn obs(m: CMatrix) -> Observable {
    Observable::dichotomic(m).unwrap()
}

/// phi+ with (X, Z, D, Y, E, F) on A and (X, Z, D, -Y, (X-Y)/sqrt2, (Z-Y)/sqrt2) on B.
pub fn extended_reference() -> Experiment {
    let s = c(FRAC_1_SQRT_2, 0.0);
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let a = vec![
        Observable::x(),
        Observable::z(),
        obs((&x + &z) * s),
        Observable::y(),
        obs((&x + &y) * s),
        obs((&y + &z) * s),
    ];
    let b = vec![
        Observable::x(),
        Observable::z(),
        obs((&x + &z) * s),
        obs(-&y),
        obs((&x - &y) * s),
        obs((&z - &y) * s),
    ];
    Experiment::new(PureState::phi_plus().density(), a, b).unwrap()
}

/// Three Mayers-Yao sub-checks, then an estimate of which conjugation
/// simulation the experiment is equivalent to.
///
/// Statistics alone cannot distinguish the simulations, so the estimate
/// reads the devices: on the support of the state K = i X Z Y acts as +1 on
/// the original branch and -1 on the conjugate branch, giving
/// a = (1 + <K_A>)/2. The coherence is the largest value compatible with
/// the two branch states, sqrt(a(1-a)) sum_j s_j t_j over their sorted
/// Schmidt coefficients.
pub fn ext_my_check(exp: &Experiment, tol: f64) -> Result<ExtMyReport> {
    if exp.observables_a().len() != 6 || exp.observables_b().len() != 6 {
        return Err(Error::InvalidArgument("extended test needs six settings per side".into()));
    }
    let stats = statistics_of(exp)?;
    let triples = [[0, 1, 2], [0, 3, 4], [3, 1, 5]];
    let mut reports = Vec::with_capacity(3);
    for t in &triples {
        reports.push(my_check(&stats.select(t, t)?, tol)?);
    }
    let base_reports: [MyReport; 3] = reports.try_into().expect("three reports");
    let subs_pass = base_reports.iter().all(|r| r.pass);

    let (psi, da, db) = purified_on_a(exp.state())?;
    let central = |o: &[Observable]| -> CMatrix {
        let k = o[0].matrix() * o[1].matrix() * o[3].matrix() * I;
        (&k + k.adjoint()) * c(0.5, 0.0)
    };
    let ka = kron(&lift_a(&central(exp.observables_a()), da), &identity(db));
    let kb = kron(&identity(da), &central(exp.observables_b()));
    let ev = |m: &CMatrix| psi.dotc(&(m * &psi)).re;
    let a_from_a = ((1.0 + ev(&ka)) / 2.0).clamp(0.0, 1.0);
    let a_from_b = ((1.0 - ev(&kb)) / 2.0).clamp(0.0, 1.0);
    // Both central elements must act as +-1 on the support.
    let ka_res = (&ka * &ka * &psi - &psi).norm();
    let consistent = (a_from_a - a_from_b).abs() <= tol.max(1e-9) && ka_res <= tol.max(1e-9);

    let a = a_from_a;
    let coherence = if a > tol && a < 1.0 - tol {
        let d = da * db;
        let plus = (CMatrix::identity(d, d) + &ka) * c(0.5, 0.0) * &psi;
        let minus = (CMatrix::identity(d, d) - &ka) * c(0.5, 0.0) * &psi;
        let sp = schmidt(&PureState::normalized(plus, vec![da, db])?)?;
        let sm = schmidt(&PureState::normalized(minus, vec![da, db])?)?;
        let overlap: f64 = sp.coefficients.iter().zip(&sm.coefficients).map(|(s, t)| s * t).sum();
        (a * (1.0 - a)).sqrt() * overlap.min(1.0)
    } else {
        0.0
    };
    let conj_params = ConjSimParams { a, c: c(coherence, 0.0) };
    let params_ok = conj_params.validate(1e-9).is_ok();
    Ok(ExtMyReport {
        base_reports,
        conj_params,
        pass: subs_pass && consistent && params_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simmap::{conj_simulate_experiment, real_simulate_experiment};

    #[test]
    fn reference_passes_with_a_one() {
        let rep = ext_my_check(&extended_reference(), 1e-10).unwrap();
        assert!(rep.pass);
        assert!((rep.conj_params.a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conj_simulation_estimates_weight() {
        let p = ConjSimParams::new(0.3, ZERO).unwrap();
        let exp = conj_simulate_experiment(&extended_reference(), p).unwrap();
        let rep = ext_my_check(&exp, 1e-10).unwrap();
        assert!(rep.pass);
        assert!((rep.conj_params.a - 0.3).abs() < 0.01);
    }

    #[test]
    fn coherent_simulation_recovers_coherence() {
        let a: f64 = 0.3;
        let p = ConjSimParams::new(a, c((a * (1.0 - a)).sqrt(), 0.0)).unwrap();
        let exp = conj_simulate_experiment(&extended_reference(), p).unwrap();
        let rep = ext_my_check(&exp, 1e-10).unwrap();
        assert!(rep.pass);
        assert!((rep.conj_params.c.re - (a * (1.0 - a)).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn real_simulation_is_half_weight() {
        let exp = real_simulate_experiment(&extended_reference()).unwrap();
        let rep = ext_my_check(&exp, 1e-10).unwrap();
        assert!(rep.pass);
        assert!((rep.conj_params.a - 0.5).abs() < 1e-9);
    }

    #[test]
    fn flipped_bob_y_fails() {
        let r = extended_reference();
        let mut b = r.observables_b().to_vec();
        b[3] = Observable::y();
        let exp = Experiment::new(r.state().clone(), r.observables_a().to_vec(), b).unwrap();
        let rep = ext_my_check(&exp, 1e-6).unwrap();
        assert!(!rep.pass);
        assert!((rep.base_reports[1].residuals["same_z"] - 2.0).abs() < 1e-12);
    }
}
