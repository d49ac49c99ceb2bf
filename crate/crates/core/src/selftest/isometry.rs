use super::{lift_a, purified_on_a};
use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::{DensityOperator, Experiment, PureState};

#[derive(Clone, Debug)]
pub struct IsometryResult {
    /// The two ancilla qubits (A's, then B's).
    pub extracted: DensityOperator,
    /// Everything else, side A (with the purifying register) then side B.
    pub junk: DensityOperator,
    pub fidelity_epr: f64,
}

/// Local swap circuit: ancilla |0>, Hadamard, controlled-Z, Hadamard,
/// controlled-X. As an isometry into ancilla (x) system:
/// |0> (x) (I + Z)/2 + |1> (x) X (I - Z)/2.
fn local_isometry(x: &CMatrix, z: &CMatrix) -> CMatrix {
    let d = x.nrows();
    let half = c(0.5, 0.0);
    let top = (identity(d) + z) * half;
    let bottom = x * (identity(d) - z) * half;
    let mut v = CMatrix::zeros(2 * d, d);
    v.view_mut((0, 0), (d, d)).copy_from(&top);
    v.view_mut((d, 0), (d, d)).copy_from(&bottom);
    v
}

/// Apply the swap circuit on both sides, using settings 0 and 1 as X and Z.
/// Mixed states are purified into a register held by A.
pub fn swap_isometry(exp: &Experiment) -> Result<IsometryResult> {
    let (oa, ob) = (exp.observables_a(), exp.observables_b());
    if oa.len() < 2 || ob.len() < 2 {
        return Err(Error::InvalidArgument("X and Z settings required on both sides".into()));
    }
    for o in oa[..2].iter().chain(&ob[..2]) {
        let dev = unitarity_deviation(o.matrix());
        if dev > 1e-9 {
            return Err(Error::NotDichotomic(dev));
        }
    }
    let (psi, da, db) = purified_on_a(exp.state())?;
    let va = local_isometry(&lift_a(oa[0].matrix(), da), &lift_a(oa[1].matrix(), da));
    let vb = local_isometry(ob[0].matrix(), ob[1].matrix());
    let out = kron(&va, &vb) * psi;
    let rho = PureState::new(out, vec![2, da, 2, db])?.density();
    let extracted = rho.partial_trace(&[0, 2])?;
    let junk = rho.partial_trace(&[1, 3])?;
    let fidelity_epr = crate::qcore::fidelity_pure(&PureState::phi_plus(), &extracted)?;
    Ok(IsometryResult {
        extracted,
        junk,
        fidelity_epr,
    })
}
