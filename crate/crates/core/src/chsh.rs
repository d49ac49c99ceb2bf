//! CHSH values, maximal violations and measurement optimization.

use crate::error::{Error, Result};
use crate::optim::{coordinate_ascent, CoordinateOptions};
use crate::qcore::linalg::*;
use crate::qcore::random::rng_stream;
use crate::qcore::{statistics_of, DensityOperator, Experiment, Observable, PureState, Statistics};
use nalgebra::Matrix3;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub const TSIRELSON: f64 = 2.0 * SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshValue {
    pub s: f64,
    /// Winning probability of the associated game, p = (S + 4) / 8.
    pub p: f64,
}

impl ChshValue {
    pub fn from_s(s: f64) -> Self {
        ChshValue { s, p: (s + 4.0) / 8.0 }
    }
}

/// S = sum_{a,b} (-1)^{ab} <A_a B_b> over the first two settings per side.
pub fn chsh_value(exp: &Experiment) -> Result<ChshValue> {
    chsh_from_statistics(&statistics_of(exp)?)
}

pub fn chsh_from_statistics(stats: &Statistics) -> Result<ChshValue> {
    if stats.settings_a() < 2 || stats.settings_b() < 2 {
        return Err(Error::InvalidArgument("CHSH needs two settings per party".into()));
    }
    let s = stats.correlator(0, 0) + stats.correlator(0, 1) + stats.correlator(1, 0) - stats.correlator(1, 1);
    Ok(ChshValue::from_s(s))
}

/// phi+ with A = (Z, X) and B = ((Z+X)/sqrt2, (Z-X)/sqrt2).
pub fn reference_experiment() -> Experiment {
    let z = pauli_z();
    let x = pauli_x();
    let s = c(FRAC_1_SQRT_2, 0.0);
    Experiment::new(
        PureState::phi_plus().density(),
        vec![Observable::z(), Observable::x()],
        vec![
            Observable::dichotomic((&z + &x) * s).unwrap(),
            Observable::dichotomic((&z - &x) * s).unwrap(),
        ],
    )
    .unwrap()
}

fn require_two_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!("expected two qubits, got {:?}", rho.dims())));
    }
    Ok(())
}

/// T_ij = tr(rho sigma_i (x) sigma_j) for sigma = (X, Y, Z).
pub fn correlation_matrix(rho: &DensityOperator) -> Result<Matrix3<f64>> {
    require_two_qubits(rho)?;
    let p = [pauli_x(), pauli_y(), pauli_z()];
    let mut t = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            t[(i, j)] = rho.expectation(&kron(&p[i], &p[j]))?;
        }
    }
    Ok(t)
}

/// Maximal CHSH value 2 sqrt(u^2 + v^2), u and v the largest singular values of T.
pub fn s_max_two_qubit(rho: &DensityOperator) -> Result<f64> {
    let t = correlation_matrix(rho)?;
    let mut sv: Vec<f64> = t.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt())
}

/// Eigenvalues of a Bell-diagonal state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellSpectrum {
    pub phi_plus: f64,
    pub psi_minus: f64,
    pub phi_minus: f64,
    pub psi_plus: f64,
}

impl BellSpectrum {
    /// From (phi+, psi-, phi-, psi+).
    pub fn new(l: [f64; 4]) -> Result<Self> {
        if l.iter().any(|&x| !(x >= -1e-12)) {
            return Err(Error::InvalidArgument("negative Bell weight".into()));
        }
        let sum: f64 = l.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized((sum - 1.0).abs()));
        }
        Ok(BellSpectrum {
            phi_plus: l[0],
            psi_minus: l[1],
            phi_minus: l[2],
            psi_plus: l[3],
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.phi_plus, self.psi_minus, self.phi_minus, self.psi_plus]
    }

    pub fn state(&self) -> DensityOperator {
        let s = FRAC_1_SQRT_2;
        let bell = |a: [f64; 4]| CVector::from_iterator(4, a.iter().map(|&x| c(x * s, 0.0)));
        let vecs = [
            bell([1.0, 0.0, 0.0, 1.0]),
            bell([0.0, 1.0, -1.0, 0.0]),
            bell([1.0, 0.0, 0.0, -1.0]),
            bell([0.0, 1.0, 1.0, 0.0]),
        ];
        let m = self
            .as_array()
            .iter()
            .zip(&vecs)
            .fold(CMatrix::zeros(4, 4), |acc, (&w, v)| acc + outer(v, v) * c(w, 0.0));
        DensityOperator::new(m, vec![2, 2]).expect("Bell-diagonal state")
    }
}

/// 2 sqrt2 sqrt((l1 - l2)^2 + (l3 - l4)^2) maximized over the three ways of
/// pairing phi+ with another Bell weight.
pub fn s_max_bell_diagonal(spec: &BellSpectrum) -> f64 {
    let l = spec.as_array();
    [(1, 2, 3), (2, 1, 3), (3, 1, 2)]
        .iter()
        .map(|&(p, q, r)| {
            let d1 = l[0] - l[p];
            let d2 = l[q] - l[r];
            TSIRELSON * (d1 * d1 + d2 * d2).sqrt()
        })
        .fold(0.0, f64::max)
}

fn sorted_order(coeffs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| coeffs[b].total_cmp(&coeffs[a]));
    order
}

fn check_schmidt(coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() || coeffs.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument("Schmidt coefficients must be non-negative".into()));
    }
    let n: f64 = coeffs.iter().map(|x| x * x).sum();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized((n - 1.0).abs()));
    }
    Ok(())
}

/// Weight and (cos, sin) of each consecutive pair of sorted coefficients.
fn pair_blocks(coeffs: &[f64]) -> Vec<(f64, f64, f64, usize, Option<usize>)> {
    let order = sorted_order(coeffs);
    order
        .chunks(2)
        .map(|ch| {
            let l0 = coeffs[ch[0]];
            let l1 = ch.get(1).map_or(0.0, |&k| coeffs[k]);
            let p = l0 * l0 + l1 * l1;
            let (cj, sj) = if p > 0.0 { (l0 / p.sqrt(), l1 / p.sqrt()) } else { (1.0, 0.0) };
            (p, cj, sj, ch[0], ch.get(1).copied())
        })
        .collect()
}

/// CHSH value of pairing sorted Schmidt coefficients into qubit blocks and
/// measuring each block optimally: sum_j p_j 2 sqrt(1 + 4 c_j^2 s_j^2).
pub fn gisin_peres_s_max(coeffs: &[f64]) -> Result<f64> {
    check_schmidt(coeffs)?;
    Ok(pair_blocks(coeffs)
        .iter()
        .map(|&(p, cj, sj, _, _)| p * 2.0 * (1.0 + 4.0 * cj * cj * sj * sj).sqrt())
        .sum())
}

/// Block-diagonal observables realizing [`gisin_peres_s_max`] on
/// sum_j coeffs[j] |jj>.
pub fn gisin_peres_measurements(coeffs: &[f64]) -> Result<(Vec<Observable>, Vec<Observable>)> {
    check_schmidt(coeffs)?;
    let d = coeffs.len();
    let mut a = [CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
    let mut b = [CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
    for (_, cj, sj, i0, i1) in pair_blocks(coeffs) {
        let Some(i1) = i1 else {
            // Unpaired level: fixed outcome +1.
            for m in a.iter_mut().chain(b.iter_mut()) {
                m[(i0, i0)] = ONE;
            }
            continue;
        };
        // Block state c|00> + s|11> has <ZZ> = 1 and <XX> = 2cs.
        let rx = 2.0 * cj * sj;
        let beta = rx.atan2(1.0);
        let put = |m: &mut CMatrix, zz: f64, xx: f64| {
            m[(i0, i0)] = c(zz, 0.0);
            m[(i1, i1)] = c(-zz, 0.0);
            m[(i0, i1)] = c(xx, 0.0);
            m[(i1, i0)] = c(xx, 0.0);
        };
        put(&mut a[0], 1.0, 0.0);
        put(&mut a[1], 0.0, 1.0);
        put(&mut b[0], beta.cos(), beta.sin());
        put(&mut b[1], beta.cos(), -beta.sin());
    }
    let to_obs = |ms: [CMatrix; 2]| -> Result<Vec<Observable>> {
        ms.into_iter().map(Observable::dichotomic).collect()
    };
    Ok((to_obs(a)?, to_obs(b)?))
}

/// Gisin-Peres measurements rotated into the Schmidt bases of `psi`.
pub fn gisin_peres_experiment(psi: &PureState) -> Result<Experiment> {
    let sch = crate::qcore::schmidt(psi)?;
    let (da, db) = (psi.dims()[0], psi.dims()[1]);
    let r = sch.coefficients.len();
    let (oa, ob) = gisin_peres_measurements(&sch.coefficients)?;
    let rotate = |obs: Vec<Observable>, basis: &CMatrix, d: usize| -> Result<Vec<Observable>> {
        let u = complete_basis(basis, d);
        obs.into_iter()
            .map(|o| {
                let mut m = identity(d);
                m.view_mut((0, 0), (r, r)).copy_from(o.matrix());
                Observable::dichotomic(&u * m * u.adjoint())
            })
            .collect()
    };
    Experiment::new(psi.density(), rotate(oa, &sch.basis_a, da)?, rotate(ob, &sch.basis_b, db)?)
}

/// Bloch angles (theta, phi) of A0, A1, B0, B1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementAngles {
    pub a: [(f64, f64); 2],
    pub b: [(f64, f64); 2],
}

#[derive(Clone, Debug)]
pub struct ChshOptimum {
    pub value: ChshValue,
    /// Present for two-qubit states.
    pub angles: Option<MeasurementAngles>,
    pub observables_a: Vec<Observable>,
    pub observables_b: Vec<Observable>,
}

fn bloch_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    [st * phi.cos(), st * phi.sin(), ct]
}

fn qubit_objective(t: &Matrix3<f64>, x: &[f64]) -> f64 {
    let v: Vec<[f64; 3]> = (0..4).map(|k| bloch_vector(x[2 * k], x[2 * k + 1])).collect();
    let corr = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
        (0..3).map(|i| (0..3).map(|j| a[i] * t[(i, j)] * b[j]).sum::<f64>()).sum()
    };
    corr(&v[0], &v[2]) + corr(&v[0], &v[3]) + corr(&v[1], &v[2]) - corr(&v[1], &v[3])
}

/// Maximize S over dichotomic measurements with seeded multi-restart search.
///
/// Two-qubit states use Bloch-angle coordinate ascent with golden-section
/// line searches; larger systems use alternating exact optimization of one
/// party's observables given the other's. Restart `k` draws from stream `k`
/// of `seed`, so adding restarts never lowers the result.
pub fn optimize_s(rho: &DensityOperator, restarts: usize, seed: u64) -> Result<ChshOptimum> {
    if rho.dims().len() != 2 {
        return Err(Error::DimensionMismatch("CHSH optimization needs two sites".into()));
    }
    let restarts = restarts.max(1);
    if rho.dims() == [2, 2] {
        let t = correlation_matrix(rho)?;
        let opts = CoordinateOptions::default();
        let runs: Vec<(Vec<f64>, f64)> = (0..restarts)
            .into_par_iter()
            .map(|k| {
                let mut rng = rng_stream(seed, k as u64);
                let x0: Vec<f64> = (0..8)
                    .map(|i| if i % 2 == 0 { rng.random_range(0.0..PI) } else { rng.random_range(0.0..2.0 * PI) })
                    .collect();
                coordinate_ascent(|x| qubit_objective(&t, x), x0, &opts)
            })
            .collect();
        let (x, _) = best_run(runs);
        let angles = MeasurementAngles {
            a: [(x[0], x[1]), (x[2], x[3])],
            b: [(x[4], x[5]), (x[6], x[7])],
        };
        let oa = vec![Observable::bloch(x[0], x[1]), Observable::bloch(x[2], x[3])];
        let ob = vec![Observable::bloch(x[4], x[5]), Observable::bloch(x[6], x[7])];
        let value = chsh_value(&Experiment::new(rho.clone(), oa.clone(), ob.clone())?)?;
        return Ok(ChshOptimum {
            value,
            angles: Some(angles),
            observables_a: oa,
            observables_b: ob,
        });
    }
    let runs: Vec<(Vec<CMatrix>, f64)> = (0..restarts)
        .into_par_iter()
        .map(|k| seesaw(rho, &mut rng_stream(seed, k as u64)))
        .collect();
    let (ms, _) = best_run(runs);
    let oa: Vec<Observable> = ms[..2].iter().cloned().map(Observable::dichotomic).collect::<Result<_>>()?;
    let ob: Vec<Observable> = ms[2..].iter().cloned().map(Observable::dichotomic).collect::<Result<_>>()?;
    let value = chsh_value(&Experiment::new(rho.clone(), oa.clone(), ob.clone())?)?;
    Ok(ChshOptimum {
        value,
        angles: None,
        observables_a: oa,
        observables_b: ob,
    })
}

fn best_run<T>(runs: Vec<(T, f64)>) -> (T, f64) {
    // First maximum wins, so the choice is independent of thread scheduling.
    runs.into_iter()
        .reduce(|best, r| if r.1 > best.1 { r } else { best })
        .expect("at least one restart")
}

/// sign(M): the dichotomic observable maximizing tr(A M) for Hermitian M.
fn sign_of(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |x| if x >= 0.0 { ONE } else { -ONE })
}

fn seesaw<R: Rng>(rho: &DensityOperator, rng: &mut R) -> (Vec<CMatrix>, f64) {
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let m = rho.matrix();
    // Effective operator on one side given an operator on the other.
    let reduce_a = |b: &CMatrix| -> CMatrix {
        crate::qcore::linalg::partial_trace_keep(&(m * kron(&identity(da), b)), &[da, db], &[0])
    };
    let reduce_b = |a: &CMatrix| -> CMatrix {
        crate::qcore::linalg::partial_trace_keep(&(m * kron(a, &identity(db))), &[da, db], &[1])
    };
    let mut b0 = crate::qcore::random::random_dichotomic(db, rng).matrix().clone();
    let mut b1 = crate::qcore::random::random_dichotomic(db, rng).matrix().clone();
    let mut a0 = identity(da);
    let mut a1 = identity(da);
    let mut last = f64::NEG_INFINITY;
    for _ in 0..500 {
        // tr(rho A (x) B) = tr(A M) with M = tr_B[rho (I (x) B)]; sign(M^dagger) maximizes.
        a0 = sign_of(&reduce_a(&(&b0 + &b1)).adjoint());
        a1 = sign_of(&reduce_a(&(&b0 - &b1)).adjoint());
        b0 = sign_of(&reduce_b(&(&a0 + &a1)).adjoint());
        b1 = sign_of(&reduce_b(&(&a0 - &a1)).adjoint());
        let s = crate::qcore::state::trace_product(m, &kron(&a0, &(&b0 + &b1))).re
            + crate::qcore::state::trace_product(m, &kron(&a1, &(&b0 - &b1))).re;
        if s - last < 1e-14 {
            last = last.max(s);
            break;
        }
        last = s;
    }
    (vec![a0, a1, b0, b1], last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::*;

    #[test]
    fn reference_reaches_tsirelson() {
        let v = chsh_value(&reference_experiment()).unwrap();
        assert!((v.s - TSIRELSON).abs() < 1e-12);
        assert!((v.p - (0.5 + SQRT_2 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn horodecki_on_phi_plus_and_identity() {
        let phi = PureState::phi_plus().density();
        assert!((s_max_two_qubit(&phi).unwrap() - TSIRELSON).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(vec![2, 2]).unwrap();
        assert!(s_max_two_qubit(&mixed).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_diagonal_limits() {
        let pure = BellSpectrum::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((s_max_bell_diagonal(&pure) - TSIRELSON).abs() < 1e-12);
        let flat = BellSpectrum::new([0.25; 4]).unwrap();
        assert!(s_max_bell_diagonal(&flat).abs() < 1e-12);
    }

    #[test]
    fn bell_diagonal_matches_horodecki() {
        let mut rng = rng_from_seed(77);
        for _ in 0..100 {
            let w: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let t: f64 = w.iter().sum();
            let spec = BellSpectrum::new([w[0] / t, w[1] / t, w[2] / t, w[3] / t]).unwrap();
            let h = s_max_two_qubit(&spec.state()).unwrap();
            assert!((s_max_bell_diagonal(&spec) - h).abs() < 1e-9);
        }
    }

    #[test]
    fn gisin_peres_qubit_value() {
        let th = PI / 6.0;
        let coeffs = [th.cos(), th.sin()];
        let s = gisin_peres_s_max(&coeffs).unwrap();
        assert!((s - 7f64.sqrt()).abs() < 1e-12);
        let (a, b) = gisin_peres_measurements(&coeffs).unwrap();
        let exp = Experiment::new(PureState::from_schmidt(&coeffs).unwrap().density(), a, b).unwrap();
        assert!((chsh_value(&exp).unwrap().s - s).abs() < 1e-12);
    }

    #[test]
    fn gisin_peres_padding() {
        let l = [0.7, 0.5, (1.0f64 - 0.49 - 0.25).sqrt()];
        let padded = [l[0], l[1], l[2], 0.0];
        let a = gisin_peres_s_max(&l).unwrap();
        let b = gisin_peres_s_max(&padded).unwrap();
        assert!((a - b).abs() < 1e-12);
        let (oa, ob) = gisin_peres_measurements(&l).unwrap();
        let exp = Experiment::new(PureState::from_schmidt(&l).unwrap().density(), oa, ob).unwrap();
        assert!((chsh_value(&exp).unwrap().s - a).abs() < 1e-12);
    }

    #[test]
    fn optimizer_reaches_tsirelson() {
        let opt = optimize_s(&PureState::phi_plus().density(), 4, 1).unwrap();
        assert!((opt.value.s - TSIRELSON).abs() < 1e-7);
    }

    #[test]
    fn seesaw_on_qutrits() {
        let psi = PureState::from_schmidt(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).unwrap();
        let opt = optimize_s(&psi.density(), 4, 2).unwrap();
        assert!((opt.value.s - TSIRELSON).abs() < 1e-7);
    }
}
