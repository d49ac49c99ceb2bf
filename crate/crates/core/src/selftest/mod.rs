//! Mayers-Yao self-tests, SWAP-isometry extraction and gate testing.
//!
//! Settings are ordered (X, Z, D) on each side, D = (X + Z)/sqrt2. The
//! extended test appends (Y, E, F) with Alice's E = (X + Y)/sqrt2,
//! F = (Y + Z)/sqrt2 and Bob's Y = -Y, E = (X - Y)/sqrt2, F = (Z - Y)/sqrt2.

mod extended;
mod gate;
mod isometry;

pub use extended::{ext_my_check, extended_reference, ExtMyReport};
pub use gate::{
    gate_setting_observables, gate_test, gate_test_experiments, moments_determine_state_check,
    moments_determine_state_check_with, pauli_moments_of, real_pauli_moments, GateBlock, GatePattern,
    GateTestReport, PauliMoments, UniquenessOptions,
};
pub use isometry::{swap_isometry, IsometryResult};

use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::{DensityOperator, Experiment, Observable, PureState, Statistics};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

pub const DEFAULT_TOL_MY: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MyReport {
    pub residuals: BTreeMap<String, f64>,
    /// Only available when the experiment (not just its statistics) is known.
    pub anticommutator_a: Option<f64>,
    pub anticommutator_b: Option<f64>,
    pub pass: bool,
}

impl MyReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

/// D = (X + Z)/sqrt2.
pub fn diagonal_observable() -> Observable {
    Observable::dichotomic((pauli_x() + pauli_z()) * c(FRAC_1_SQRT_2, 0.0)).unwrap()
}

/// phi+ with (X, Z, D) on both sides.
pub fn mayers_yao_reference() -> Experiment {
    let obs = vec![Observable::x(), Observable::z(), diagonal_observable()];
    Experiment::new(PureState::phi_plus().density(), obs.clone(), obs).unwrap()
}

/// Deviation of the statistics of settings (X, Z, D) = (0, 1, 2) from the
/// reference values.
pub fn my_check(stats: &Statistics, tol: f64) -> Result<MyReport> {
    if stats.settings_a() < 3 || stats.settings_b() < 3 {
        return Err(Error::InvalidArgument("Mayers-Yao check needs settings (X, Z, D) on both sides".into()));
    }
    let names = ["x", "z", "d"];
    let mut r = BTreeMap::new();
    for (k, n) in names.iter().enumerate() {
        r.insert(format!("marginal_a_{n}"), stats.marginal_a(k).abs());
        r.insert(format!("marginal_b_{n}"), stats.marginal_b(k).abs());
        r.insert(format!("same_{n}"), (1.0 - stats.correlator(k, k)).abs());
    }
    r.insert("uncorrelated_xz".into(), stats.correlator(0, 1).abs());
    r.insert("uncorrelated_zx".into(), stats.correlator(1, 0).abs());
    for (a, b, n) in [(0, 2, "xd"), (1, 2, "zd"), (2, 0, "dx"), (2, 1, "dz")] {
        r.insert(format!("overlap_{n}"), (stats.correlator(a, b) - FRAC_1_SQRT_2).abs());
    }
    let pass = r.values().all(|&v| v <= tol);
    Ok(MyReport {
        residuals: r,
        anticommutator_a: None,
        anticommutator_b: None,
        pass,
    })
}

/// [`my_check`] on the experiment's statistics, with the anticommutator
/// residuals filled in.
pub fn my_check_experiment(exp: &Experiment, tol: f64) -> Result<MyReport> {
    let mut rep = my_check(&crate::qcore::statistics_of(exp)?, tol)?;
    rep.anticommutator_a = Some(anticommutator_residual(exp, Side::A)?);
    rep.anticommutator_b = Some(anticommutator_residual(exp, Side::B)?);
    Ok(rep)
}

/// Purification of the experiment's state with the extra register merged
/// into side A. Returns the vector and the dimensions (dA * r, dB).
pub(crate) fn purified_on_a(rho: &DensityOperator) -> Result<(CVector, usize, usize)> {
    let p = rho.purify();
    let (da, db, r) = (p.dims()[0], p.dims()[1], p.dims()[2]);
    let q = p.permute(&[0, 2, 1])?;
    Ok((q.amplitudes().clone(), da * r, db))
}

/// Lift an operator on A to the purified side A (x) register.
pub(crate) fn lift_a(op: &CMatrix, da_full: usize) -> CMatrix {
    let r = da_full / op.nrows();
    kron(op, &identity(r))
}

/// ||(X Z + Z X) (x) I |psi>|| on the purified state, X and Z being the
/// side's settings 0 and 1.
pub fn anticommutator_residual(exp: &Experiment, side: Side) -> Result<f64> {
    let obs = match side {
        Side::A => exp.observables_a(),
        Side::B => exp.observables_b(),
    };
    if obs.len() < 2 {
        return Err(Error::InvalidArgument("X and Z settings required".into()));
    }
    let (x, z) = (obs[0].matrix(), obs[1].matrix());
    let anti = x * z + z * x;
    let (psi, da, db) = purified_on_a(exp.state())?;
    let full = match side {
        Side::A => kron(&lift_a(&anti, da), &identity(db)),
        Side::B => kron(&identity(da), &anti),
    };
    Ok((full * psi).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::statistics_of;
    use crate::simmap::{conj_simulate_experiment, ConjSimParams};

    fn conjugated(exp: &Experiment) -> Experiment {
        let cj = |o: &Observable| Observable::dichotomic(conj(o.matrix())).unwrap();
        Experiment::new(
            DensityOperator::new(conj(exp.state().matrix()), exp.state().dims().to_vec()).unwrap(),
            exp.observables_a().iter().map(cj).collect(),
            exp.observables_b().iter().map(cj).collect(),
        )
        .unwrap()
    }

    #[test]
    fn reference_passes() {
        let rep = my_check_experiment(&mayers_yao_reference(), 1e-12).unwrap();
        assert!(rep.pass && rep.max_residual() <= 1e-12);
        assert!(rep.anticommutator_a.unwrap() < 1e-12 && rep.anticommutator_b.unwrap() < 1e-12);
    }

    #[test]
    fn conjugated_reference_passes() {
        let exp = conjugated(&extended_reference());
        let stats = statistics_of(&exp).unwrap();
        assert!(my_check(&stats, 1e-12).unwrap().pass);
    }

    #[test]
    fn d_replaced_by_x_fails() {
        let obs = vec![Observable::x(), Observable::z(), Observable::x()];
        let exp = Experiment::new(PureState::phi_plus().density(), obs.clone(), obs).unwrap();
        let rep = my_check(&statistics_of(&exp).unwrap(), 1e-6).unwrap();
        assert!(!rep.pass);
        assert!((rep.residuals["overlap_xd"] - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn equal_x_and_z_anticommutator_is_two() {
        let obs = vec![Observable::x(), Observable::x(), diagonal_observable()];
        let exp = Experiment::new(PureState::phi_plus().density(), obs, mayers_yao_reference().observables_b().to_vec())
            .unwrap();
        assert!((anticommutator_residual(&exp, Side::A).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn anticommutator_grows_with_rotation() {
        let mut last = -1.0;
        for eps in [0.0, 0.01, 0.05, 0.1] {
            // Rotate Z about Y by eps so it no longer anticommutes with X.
            let r = unitary_evolution(&pauli_y(), eps / 2.0);
            let zr = Observable::z().conjugate_by(&r).unwrap();
            let obs = vec![Observable::x(), zr, diagonal_observable()];
            let exp = Experiment::new(PureState::phi_plus().density(), obs.clone(), obs).unwrap();
            let v = anticommutator_residual(&exp, Side::A).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn conj_simulation_passes() {
        let exp = conj_simulate_experiment(&mayers_yao_reference(), ConjSimParams::half()).unwrap();
        let rep = my_check_experiment(&exp, 1e-10).unwrap();
        assert!(rep.pass);
        assert!(rep.anticommutator_a.unwrap() < 1e-10);
    }

    #[test]
    fn too_few_settings_is_an_error() {
        let stats = statistics_of(&crate::chsh::reference_experiment()).unwrap();
        assert!(my_check(&stats, 1e-6).is_err());
    }
}
