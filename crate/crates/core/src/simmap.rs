//! Real and complex-conjugate simulations of complex quantum experiments.
//!
//! The real map sends a complex number a to the 2x2 real matrix
//! Re(a) I + Im(a) XZ. On matrices the extra qubit is the slowest factor:
//! R(M) = I (x) Re(M) + XZ (x) Im(M).

use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::{ChannelKraus, DensityOperator, Experiment, MultipartyExperiment, Observable, Povm, PureState};

pub fn real_map_operator(m: &CMatrix) -> CMatrix {
    kron(&identity(2), &real_part(m)) + kron(&xz(), &imag_part(m))
}

/// R(rho) / 2, with the extra qubit prepended as site 0.
pub fn real_map_density(rho: &DensityOperator) -> Result<DensityOperator> {
    let m = real_map_operator(rho.matrix()) * c(0.5, 0.0);
    DensityOperator::new(m, prepend(2, rho.dims()))
}

pub fn real_map_observable(o: &Observable) -> Result<Observable> {
    let m = real_map_operator(o.matrix());
    if o.is_dichotomic() {
        Observable::dichotomic(m)
    } else {
        Observable::general(m)
    }
}

pub fn real_map_povm(p: &Povm) -> Result<Povm> {
    Povm::new(p.elements().iter().map(real_map_operator).collect())
}

pub fn real_map_kraus(ch: &ChannelKraus) -> Result<ChannelKraus> {
    ChannelKraus::new(ch.kraus().iter().map(real_map_operator).collect())
}

/// Real antisymmetric generator -(XZ (x) I) R(H); its exponential
/// exp(G t) equals R(exp(-i H t)).
pub fn real_map_hamiltonian_generator(h: &CMatrix) -> Result<CMatrix> {
    let dev = hermiticity_deviation(h);
    if dev > 1e-9 {
        return Err(Error::NotHermitian(dev));
    }
    let d = h.nrows();
    Ok(-(kron(&xz(), &identity(d)) * real_map_operator(h)))
}

/// The two real columns of R(|psi>): u = (Re psi, Im psi), v = (-Im psi, Re psi).
/// The simulating state R(|psi><psi|)/2 is the equal mixture of u and v.
pub fn real_pure_split(psi: &PureState) -> Result<(PureState, PureState)> {
    let a = psi.amplitudes();
    let n = a.len();
    let u = CVector::from_fn(2 * n, |i, _| if i < n { c(a[i].re, 0.0) } else { c(a[i - n].im, 0.0) });
    let v = CVector::from_fn(2 * n, |i, _| if i < n { c(-a[i].im, 0.0) } else { c(a[i - n].re, 0.0) });
    let dims = prepend(2, psi.dims());
    Ok((PureState::new(u, dims.clone())?, PureState::new(v, dims)?))
}

fn prepend(d: usize, dims: &[usize]) -> Vec<usize> {
    std::iter::once(d).chain(dims.iter().copied()).collect()
}

/// Logical states of the k-qubit real code. |0L> is the normalized sum of
/// even-weight strings x with sign (-1)^(w/2); |1L> the odd-weight strings
/// with sign (-1)^((w-1)/2).
pub fn multiparty_real_logical(k: usize) -> (CVector, CVector) {
    assert!(k >= 1, "need at least one party");
    let n = 1usize << k;
    let norm = c((2f64).powi(-((k - 1) as i32)).sqrt(), 0.0);
    let mut zero = CVector::zeros(n);
    let mut one = CVector::zeros(n);
    for x in 0..n {
        let w = x.count_ones() as usize;
        if w.is_multiple_of(2) {
            zero[x] = if (w / 2).is_multiple_of(2) { ONE } else { -ONE } * norm;
        } else {
            one[x] = if ((w - 1) / 2).is_multiple_of(2) { ONE } else { -ONE } * norm;
        }
    }
    (zero, one)
}

/// Sum_x (Re psi_x |0L> + Im psi_x |1L>) |x>, ancilla qubits first.
pub fn multiparty_real_state(psi: &PureState, k: usize) -> Result<PureState> {
    let (zero, one) = multiparty_real_logical(k);
    let a = psi.amplitudes();
    let re = a.map(|z| c(z.re, 0.0));
    let im = a.map(|z| c(z.im, 0.0));
    let v = kron_vec(&zero, &re) + kron_vec(&one, &im);
    let mut dims = vec![2; k];
    dims.extend_from_slice(psi.dims());
    PureState::new(v, dims)
}

/// Move ancilla m (site m of the first k) next to data site m and merge the pair.
fn interleave(rho: &DensityOperator, k: usize) -> Result<DensityOperator> {
    let dims = rho.dims();
    let perm: Vec<usize> = (0..k).flat_map(|m| [m, k + m]).collect();
    let permuted = rho.permute(&perm)?;
    let merged: Vec<usize> = (0..k).map(|m| 2 * dims[k + m]).collect();
    Ok(permuted.with_dims_unchecked(merged))
}

fn map_settings(
    exp: &MultipartyExperiment,
    f: impl Fn(&CMatrix) -> CMatrix,
) -> Result<Vec<Vec<Observable>>> {
    exp.settings()
        .iter()
        .map(|obs| obs.iter().map(|o| Observable::dichotomic(f(o.matrix()))).collect())
        .collect()
}

/// Real simulation of a multiparty experiment. Each party gets one extra
/// qubit and measures R(M) locally; the shared state is
/// (E_I (x) Re(rho) + E_XZ (x) Im(rho)) / 2 on the real code.
pub fn real_simulate(exp: &MultipartyExperiment) -> Result<MultipartyExperiment> {
    let k = exp.parties();
    let rho = exp.state();
    let (zero, one) = multiparty_real_logical(k);
    let e_i = outer(&zero, &zero) + outer(&one, &one);
    let e_xz = outer(&one, &zero) - outer(&zero, &one);
    let m = (kron(&e_i, &real_part(rho.matrix())) + kron(&e_xz, &imag_part(rho.matrix()))) * c(0.5, 0.0);
    let mut dims = vec![2; k];
    dims.extend_from_slice(rho.dims());
    let sim = interleave(&DensityOperator::new(m, dims)?, k)?;
    MultipartyExperiment::new(sim, map_settings(exp, real_map_operator)?)
}

pub fn real_simulate_experiment(exp: &Experiment) -> Result<Experiment> {
    to_bipartite(real_simulate(&exp.to_multiparty())?)
}

fn to_bipartite(m: MultipartyExperiment) -> Result<Experiment> {
    let mut settings = m.settings().to_vec();
    let b = settings.pop().unwrap_or_default();
    let a = settings.pop().unwrap_or_default();
    Experiment::new(m.state().clone(), a, b)
}

/// Weights of the two branches: a on the original experiment, 1-a on its
/// conjugate, with coherence c between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjSimParams {
    pub a: f64,
    pub c: C64,
}

impl ConjSimParams {
    pub fn new(a: f64, c: C64) -> Result<Self> {
        let p = ConjSimParams { a, c };
        p.validate(1e-12)?;
        Ok(p)
    }

    /// The incoherent equal mixture.
    pub fn half() -> Self {
        ConjSimParams { a: 0.5, c: ZERO }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::InvalidArgument(format!("branch weight a = {}", self.a)));
        }
        if self.c.norm() > (self.a * (1.0 - self.a)).sqrt() + tol {
            return Err(Error::InvalidArgument(format!(
                "coherence |c| = {} exceeds sqrt(a(1-a))",
                self.c.norm()
            )));
        }
        Ok(())
    }
}

/// |0><0| (x) M + |1><1| (x) M*, equivalently I (x) Re(M) + iZ (x) Im(M).
pub fn conj_map_operator(m: &CMatrix) -> CMatrix {
    let p0 = real_matrix(2, &[1.0, 0.0, 0.0, 0.0]);
    let p1 = real_matrix(2, &[0.0, 0.0, 0.0, 1.0]);
    kron(&p0, m) + kron(&p1, &conj(m))
}

/// H' = |0><0| (x) H - |1><1| (x) H*, so that exp(-i H' t) = C(exp(-i H t)).
pub fn conj_sim_hamiltonian(h: &CMatrix) -> Result<CMatrix> {
    let dev = hermiticity_deviation(h);
    if dev > 1e-9 {
        return Err(Error::NotHermitian(dev));
    }
    let p0 = real_matrix(2, &[1.0, 0.0, 0.0, 0.0]);
    let p1 = real_matrix(2, &[0.0, 0.0, 0.0, 1.0]);
    Ok(kron(&p0, h) - kron(&p1, &conj(h)))
}

/// alpha |0..0>|psi> + beta |1..1>|psi*> with k ancilla qubits first.
pub fn conj_sim_pure(psi: &PureState, alpha: C64, beta: C64, k: usize) -> Result<PureState> {
    let n = 1usize << k;
    let mut first = CVector::zeros(n);
    first[0] = alpha;
    let mut last = CVector::zeros(n);
    last[n - 1] = beta;
    let a = psi.amplitudes();
    let v = kron_vec(&first, a) + kron_vec(&last, &a.map(|z| z.conj()));
    let mut dims = vec![2; k];
    dims.extend_from_slice(psi.dims());
    PureState::new(v, dims)
}

/// Mixed simulating state with k ancilla qubits first:
/// a |0..0><0..0| (x) rho + (1-a) |1..1><1..1| (x) rho*
/// + c |0..0><1..1| (x) X + h.c., with X = sum_i p_i |psi_i><psi_i*| from
///   the spectral decomposition of rho.
pub fn conj_sim_density(rho: &DensityOperator, params: ConjSimParams, k: usize) -> Result<DensityOperator> {
    params.validate(1e-12)?;
    let n = 1usize << k;
    let d = rho.dim();
    let (vals, vecs) = rho.eigen();
    let mut cross = CMatrix::zeros(d, d);
    for (i, &p) in vals.iter().enumerate() {
        if p > 0.0 {
            let v = vecs.column(i).into_owned();
            cross += &v * v.transpose() * c(p, 0.0);
        }
    }
    let e = |r: usize, s: usize| CMatrix::from_fn(n, n, |i, j| if i == r && j == s { ONE } else { ZERO });
    let m = kron(&e(0, 0), rho.matrix()) * c(params.a, 0.0)
        + kron(&e(n - 1, n - 1), &conj(rho.matrix())) * c(1.0 - params.a, 0.0)
        + kron(&e(0, n - 1), &cross) * params.c
        + kron(&e(n - 1, 0), &cross.adjoint()) * params.c.conj();
    let mut dims = vec![2; k];
    dims.extend_from_slice(rho.dims());
    DensityOperator::new(m, dims)
}

/// Conjugation simulation with one ancilla qubit per party.
pub fn conj_simulate(exp: &MultipartyExperiment, params: ConjSimParams) -> Result<MultipartyExperiment> {
    let k = exp.parties();
    let sim = interleave(&conj_sim_density(exp.state(), params, k)?, k)?;
    MultipartyExperiment::new(sim, map_settings(exp, conj_map_operator)?)
}

pub fn conj_simulate_experiment(exp: &Experiment, params: ConjSimParams) -> Result<Experiment> {
    to_bipartite(conj_simulate(&exp.to_multiparty(), params)?)
}

/// U^(x)k with U = [[1, 1], [-i, i]]/sqrt(2). On each ancilla, U C(M) U^dagger
/// equals R(M), and the equal-weight coherent conjugation state maps to the
/// real multiparty state.
pub fn conj_to_real_basis_change(k: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(0.0, -s), c(0.0, s)]);
    kron_all(std::iter::repeat_n(&u, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::*;
    use crate::qcore::statistics_of;

    #[test]
    fn real_map_of_i_is_xz() {
        let m = CMatrix::from_element(1, 1, I);
        assert!(max_abs_diff(&real_map_operator(&m), &xz()) < 1e-15);
    }

    #[test]
    fn real_map_is_multiplicative() {
        let mut rng = rng_from_seed(11);
        let a = ginibre(3, 3, &mut rng);
        let b = ginibre(3, 3, &mut rng);
        let lhs = real_map_operator(&(&a * &b));
        let rhs = real_map_operator(&a) * real_map_operator(&b);
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn split_mixture_is_real_state() {
        let psi = random_pure(&[2, 2], &mut rng_from_seed(5));
        let (u, v) = real_pure_split(&psi).unwrap();
        let mix = (u.density().matrix() + v.density().matrix()) * c(0.5, 0.0);
        let target = real_map_density(&psi.density()).unwrap();
        assert!(max_abs_diff(&mix, target.matrix()) < 1e-12);
        assert!(u.inner(&v).norm() < 1e-12);
    }

    #[test]
    fn logical_states_are_orthonormal() {
        for k in 1..=4 {
            let (z, o) = multiparty_real_logical(k);
            assert!((z.norm() - 1.0).abs() < 1e-12 && (o.norm() - 1.0).abs() < 1e-12);
            assert!(z.dotc(&o).norm() < 1e-12);
        }
    }

    #[test]
    fn bipartite_real_simulation_reproduces_chsh_statistics() {
        let exp = crate::chsh::reference_experiment();
        let sim = real_simulate_experiment(&exp).unwrap();
        assert!(is_real(sim.state().matrix(), 1e-15));
        let d = statistics_of(&exp).unwrap().max_deviation(&statistics_of(&sim).unwrap()).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn conj_params_are_validated() {
        assert!(ConjSimParams::new(0.5, c(0.5, 0.0)).is_ok());
        assert!(ConjSimParams::new(0.5, c(0.6, 0.0)).is_err());
        assert!(ConjSimParams::new(1.2, ZERO).is_err());
    }

    #[test]
    fn basis_change_maps_conj_to_real_operator() {
        let m = ginibre(2, 2, &mut rng_from_seed(9));
        let u = conj_to_real_basis_change(1);
        let lhs = kron(&u, &identity(2)) * conj_map_operator(&m) * kron(&u, &identity(2)).adjoint();
        assert!(max_abs_diff(&lhs, &real_map_operator(&m)) < 1e-12);
    }
}
