//! Device-independent key distribution: Jordan reduction to qubit
//! strategies, parameter-estimation tail bound, entropy bounds and key rate.

use crate::chsh::{chsh_value, BellSpectrum, TSIRELSON};
use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::random::rng_stream;
use crate::qcore::{statistics_of, DensityOperator, Experiment, Observable, Statistics};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// One invariant subspace of a pair of dichotomic observables.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanBlock {
    /// Columns of the basis change spanning the block.
    pub indices: Vec<usize>,
    /// The observables restricted to the block (2x2 or 1x1).
    pub a0: CMatrix,
    pub a1: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanDecomposition {
    pub basis_change: CMatrix,
    pub blocks: Vec<JordanBlock>,
}

/// Eigenvalues of (A0 A1 + A1 A0)/2 closer than this are treated as one cluster.
const CLUSTER_GAP: f64 = 1e-7;
/// Clusters with |t| this close to 1 are commuting (1x1 blocks).
const COMMUTING_GAP: f64 = 1e-8;

/// Simultaneous block diagonalization of two dichotomic observables into
/// 2x2 and 1x1 blocks.
///
/// The anticommutator T = (A0 A1 + A1 A0)/2 commutes with both observables.
/// On an eigenspace of T with eigenvalue t, each +1 eigenvector v of A0
/// pairs with w proportional to A1 v - t v, which is a -1 eigenvector of
/// A0; {v, w} is invariant under both. Eigenspaces with t = +-1 are where
/// the observables commute and split into 1x1 blocks.
pub fn jordan_blocks(a0: &Observable, a1: &Observable) -> Result<JordanDecomposition> {
    if !a0.is_dichotomic() || !a1.is_dichotomic() {
        return Err(Error::NotDichotomic(f64::NAN));
    }
    if a0.dim() != a1.dim() {
        return Err(Error::DimensionMismatch("observables differ in dimension".into()));
    }
    let (m0, m1) = (a0.matrix(), a1.matrix());
    let d = m0.nrows();
    let t = (m0 * m1 + m1 * m0) * c(0.5, 0.0);
    let (vals, vecs) = eigh(&t);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..d {
        match clusters.last_mut() {
            Some(cl) if vals[k] - vals[*cl.last().unwrap()] < CLUSTER_GAP => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let mut columns: Vec<CVector> = Vec::with_capacity(d);
    let mut sizes: Vec<usize> = Vec::new();
    for cl in &clusters {
        let w = CMatrix::from_columns(&cl.iter().map(|&k| vecs.column(k)).collect::<Vec<_>>());
        let tmean = cl.iter().map(|&k| vals[k]).sum::<f64>() / cl.len() as f64;
        let (ev, eu) = eigh(&(w.adjoint() * m0 * &w));
        if 1.0 - tmean.abs() < COMMUTING_GAP {
            // Observables commute here; diagonalize A0 + 2 A1 to split both.
            let (_, u) = eigh(&(w.adjoint() * (m0 + m1 * c(2.0, 0.0)) * &w));
            for k in 0..u.ncols() {
                columns.push(&w * u.column(k));
                sizes.push(1);
            }
            continue;
        }
        let mut ws: Vec<CVector> = Vec::new();
        for k in (0..ev.len()).filter(|&k| ev[k] > 0.0) {
            let v: CVector = &w * eu.column(k);
            let tv = v.dotc(&(m1 * &v));
            let mut u = m1 * &v - &v * tv;
            for prev in &ws {
                let p = prev.dotc(&u);
                u -= prev * p;
            }
            let n = u.norm();
            if n < 1e-12 {
                return Err(Error::Numerical("degenerate Jordan pair".into()));
            }
            let wv = u / c(n, 0.0);
            columns.push(v);
            columns.push(wv.clone());
            ws.push(wv);
            sizes.push(2);
        }
    }
    if columns.len() != d {
        return Err(Error::Numerical(format!(
            "Jordan reduction produced {} of {d} basis vectors",
            columns.len()
        )));
    }
    let basis_change = CMatrix::from_columns(&columns);
    let c0 = basis_change.adjoint() * m0 * &basis_change;
    let c1 = basis_change.adjoint() * m1 * &basis_change;
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for s in sizes {
        blocks.push(JordanBlock {
            indices: (start..start + s).collect(),
            a0: c0.view((start, start), (s, s)).into_owned(),
            a1: c1.view((start, start), (s, s)).into_owned(),
        });
        start += s;
    }
    Ok(JordanDecomposition { basis_change, blocks })
}

impl JordanDecomposition {
    /// Frobenius norm of everything outside the blocks of U^dagger M U.
    pub fn block_residual(&self, m: &CMatrix) -> f64 {
        let c = self.basis_change.adjoint() * m * &self.basis_change;
        let mut owner = vec![0; c.nrows()];
        for (b, blk) in self.blocks.iter().enumerate() {
            for &i in &blk.indices {
                owner[i] = b;
            }
        }
        let mut s = 0.0;
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                if owner[i] != owner[j] {
                    s += c[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

/// Isometry from a qubit into the block and the two qubit observables.
/// 1x1 blocks pin the qubit to |0> and measure (+-1) Z.
fn qubit_branch(decomp: &JordanDecomposition, blk: &JordanBlock) -> (CMatrix, CMatrix, CMatrix) {
    let d = decomp.basis_change.nrows();
    let mut emb = CMatrix::zeros(d, 2);
    for (k, &i) in blk.indices.iter().enumerate() {
        emb.set_column(k, &decomp.basis_change.column(i));
    }
    if blk.indices.len() == 2 {
        (emb, blk.a0.clone(), blk.a1.clone())
    } else {
        let z = pauli_z();
        let sign = |m: &CMatrix| c(m[(0, 0)].re.signum(), 0.0);
        (emb, &z * sign(&blk.a0), &z * sign(&blk.a1))
    }
}

/// Split an experiment with two settings per side into a mixture of
/// two-qubit strategies indexed by the Jordan blocks of each side.
pub fn decompose_strategy(exp: &Experiment) -> Result<Vec<(f64, Experiment)>> {
    let (oa, ob) = (exp.observables_a(), exp.observables_b());
    if oa.len() != 2 || ob.len() != 2 {
        return Err(Error::InvalidArgument("strategy decomposition needs two settings per side".into()));
    }
    let ja = jordan_blocks(&oa[0], &oa[1])?;
    let jb = jordan_blocks(&ob[0], &ob[1])?;
    let rho = exp.state().matrix();
    let mut out = Vec::new();
    for ba in &ja.blocks {
        let (ea, a0, a1) = qubit_branch(&ja, ba);
        for bb in &jb.blocks {
            let (eb, b0, b1) = qubit_branch(&jb, bb);
            let e = kron(&ea, &eb);
            let branch = e.adjoint() * rho * &e;
            let p = trace(&branch).re;
            if p <= 1e-14 {
                continue;
            }
            let state = DensityOperator::new(branch / c(p, 0.0), vec![2, 2])?;
            let obs = |m: CMatrix| Observable::dichotomic(m);
            out.push((
                p,
                Experiment::new(state, vec![obs(a0.clone())?, obs(a1.clone())?], vec![obs(b0)?, obs(b1)?])?,
            ));
        }
    }
    Ok(out)
}

/// Sum_b p_b S_b over the decomposition.
pub fn recombined_chsh(branches: &[(f64, Experiment)]) -> Result<f64> {
    branches
        .iter()
        .map(|(p, e)| Ok(p * chsh_value(e)?.s))
        .sum()
}

/// Mixture of the branch statistics, weighted by branch probability.
pub fn recombined_statistics(branches: &[(f64, Experiment)]) -> Result<Statistics> {
    let mut table = vec![[0.0; 4]; 4];
    for (p, e) in branches {
        let st = statistics_of(e)?;
        for (row, src) in table.iter_mut().zip(st.table()) {
            for k in 0..4 {
                row[k] += p * src[k];
            }
        }
    }
    Statistics::new(2, 2, table)
}

/// Binary entropy in bits, h(0) = h(1) = 0.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBoundInput {
    /// Key-generation trials.
    pub n: u64,
    /// Parameter-estimation trials.
    pub m: u64,
    /// Systems not covered by the product approximation.
    pub r: u64,
    /// Winning probability of the branch state.
    pub p: f64,
    pub mu: f64,
}

impl TailBoundInput {
    pub fn validate(&self) -> Result<()> {
        if self.r > self.m {
            return Err(Error::InvalidArgument(format!("need r <= m, got r = {}, m = {}", self.r, self.m)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidArgument(format!("mu = {} must be positive", self.mu)));
        }
        if self.m == self.r {
            return Err(Error::InvalidArgument("m == r leaves no estimation trials".into()));
        }
        Ok(())
    }
}

/// cos^4(pi/8).
pub fn cos4_pi8() -> f64 {
    (PI / 8.0).cos().powi(4)
}

/// exp(-2 m mu^2 / cos^4(pi/8)): the bound with no remainder systems.
pub fn hoeffding_bound(m: u64, mu: f64) -> f64 {
    (-2.0 * m as f64 * mu * mu / cos4_pi8()).exp().min(1.0)
}

/// min(1, exp(-2 (m mu - r (1-p))^2 / ((m - r) cos^4(pi/8)) + (n+m) h(r/(n+m)) ln 2)).
pub fn tail_bound(input: &TailBoundInput) -> Result<f64> {
    input.validate()?;
    let (n, m, r) = (input.n as f64, input.m as f64, input.r as f64);
    let dev = m * input.mu - r * (1.0 - input.p);
    let expo = -2.0 * dev * dev / ((m - r) * cos4_pi8()) + (n + m) * binary_entropy(r / (n + m)) * std::f64::consts::LN_2;
    Ok(expo.exp().min(1.0))
}

/// Smallest mu with tail_bound <= eps, by bisection. The bound decreases
/// in mu only while m mu exceeds r (1 - p), so the search starts there.
pub fn mu_for_epsilon(n: u64, m: u64, r: u64, p: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1)")));
    }
    let base = r as f64 * (1.0 - p) / m as f64;
    let bound = |mu: f64| {
        tail_bound(&TailBoundInput { n, m, r, p, mu })
    };
    let mut lo = base.max(1e-15);
    let mut hi = base + 1.0;
    while bound(hi)? > eps {
        hi = base + 2.0 * (hi - base);
        if hi > 1e6 {
            return Err(Error::Numerical("no mu reaches the requested epsilon".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bound(mid)? > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Fraction of `runs` experiments of m Bernoulli(p) trials whose success
/// rate exceeds p + mu. Runs are split over seeded streams.
pub fn monte_carlo_tail(m: u64, p: f64, mu: f64, runs: u64, seed: u64) -> f64 {
    const CHUNKS: u64 = 64;
    let hits: u64 = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rng_stream(seed, chunk);
            let count = runs / CHUNKS + u64::from(chunk < runs % CHUNKS);
            (0..count)
                .filter(|_| {
                    let y = (0..m).filter(|_| rng.random::<f64>() < p).count() as f64;
                    y / m as f64 > p + mu
                })
                .count() as u64
        })
        .sum();
    hits as f64 / runs as f64
}

/// Eigenvalues (Lambda_0, Lambda_1) of each block of Eve's state after Bob
/// measures at angle theta in the X-Z plane.
pub fn eve_eigenvalues(spec: &BellSpectrum, theta: f64) -> Result<(f64, f64)> {
    let d1 = spec.phi_plus - spec.psi_minus;
    let d2 = spec.phi_minus - spec.psi_plus;
    let disc = d1 * d1 + d2 * d2 + 2.0 * (4.0 * theta).cos() * d1 * d2;
    if disc < -1e-12 {
        return Err(Error::Numerical(format!("negative discriminant {disc}")));
    }
    let r = disc.max(0.0).sqrt();
    Ok((0.25 * (1.0 + r), 0.25 * (1.0 - r)))
}

/// H(Y|E) = H(YE) - H(E) = 1 + h(2 Lambda_0) - H(lambda).
pub fn hye_direct(spec: &BellSpectrum, theta: f64) -> Result<f64> {
    let (l0, _) = eve_eigenvalues(spec, theta)?;
    Ok(1.0 + binary_entropy(2.0 * l0) - shannon_entropy(&spec.as_array()))
}

/// (1 + sqrt((s/2)^2 - 1))/2 for s in [2, 2 sqrt2].
pub fn f_of_s(s: f64) -> Result<f64> {
    check_s(s)?;
    let s = s.clamp(2.0, TSIRELSON);
    Ok(0.5 * (1.0 + ((s / 2.0).powi(2) - 1.0).max(0.0).sqrt()))
}

fn check_s(s: f64) -> Result<()> {
    if !(2.0 - 1e-12..=TSIRELSON + 1e-12).contains(&s) {
        return Err(Error::InvalidArgument(format!("CHSH value {s} outside [2, 2 sqrt2]")));
    }
    Ok(())
}

/// 1 - h(f(s)).
pub fn hye_bound(s: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(f_of_s(s)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyRateInput {
    pub s: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyRate {
    pub raw: f64,
    /// max(raw, 0).
    pub rate: f64,
}

/// 1 - h(f(s)) - h(q).
pub fn key_rate(input: &KeyRateInput) -> Result<KeyRate> {
    if !(0.0..=1.0).contains(&input.q) {
        return Err(Error::InvalidArgument(format!("error rate {} outside [0, 1]", input.q)));
    }
    let raw = hye_bound(input.s)? - binary_entropy(input.q);
    Ok(KeyRate { raw, rate: raw.max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::*;
    use crate::qcore::PureState;

    #[test]
    fn x_and_z_form_one_block() {
        let j = jordan_blocks(&Observable::x(), &Observable::z()).unwrap();
        assert_eq!(j.blocks.len(), 1);
        assert_eq!(j.blocks[0].indices.len(), 2);
    }

    #[test]
    fn direct_sum_gives_two_blocks() {
        let sum = |a: &CMatrix, b: &CMatrix| {
            let mut m = CMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(a);
            m.view_mut((2, 2), (2, 2)).copy_from(b);
            m
        };
        let a0 = Observable::dichotomic(sum(&pauli_x(), &pauli_z())).unwrap();
        let a1 = Observable::dichotomic(sum(&pauli_z(), &pauli_x())).unwrap();
        let j = jordan_blocks(&a0, &a1).unwrap();
        assert_eq!(j.blocks.iter().filter(|b| b.indices.len() == 2).count(), 2);
        assert!(j.block_residual(a0.matrix()) < 1e-10);
        assert!(j.block_residual(a1.matrix()) < 1e-10);
    }

    #[test]
    fn random_pairs_block_diagonalize() {
        let mut rng = rng_from_seed(21);
        for _ in 0..50 {
            let a0 = random_dichotomic(6, &mut rng);
            let a1 = random_dichotomic(6, &mut rng);
            let j = jordan_blocks(&a0, &a1).unwrap();
            assert!(unitarity_deviation(&j.basis_change) < 1e-9);
            assert!(j.block_residual(a0.matrix()) < 1e-9);
            assert!(j.block_residual(a1.matrix()) < 1e-9);
        }
    }

    #[test]
    fn two_qubit_reference_is_one_branch() {
        let b = decompose_strategy(&crate::chsh::reference_experiment()).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_reference_value() {
        let p = (PI / 8.0).cos().powi(2);
        let b = tail_bound(&TailBoundInput { n: 1000, m: 100, r: 0, p, mu: 0.1 }).unwrap();
        // -2 * 100 * 0.01 / cos^4(pi/8), cos^4(pi/8) = (2 + sqrt2)^2 / 16.
        let c4 = (2.0 + 2f64.sqrt()).powi(2) / 16.0;
        assert!((b - (-2.0 / c4).exp()).abs() < 1e-12);
        assert!((b.ln() + 2.745166).abs() < 1e-5);
    }

    #[test]
    fn conjugation_preserves_spectra() {
        let mut rng = rng_from_seed(4);
        for _ in 0..10 {
            let a0 = random_dichotomic(5, &mut rng);
            let a1 = random_dichotomic(5, &mut rng);
            let j = jordan_blocks(&a0, &a1).unwrap();
            for a in [&a0, &a1] {
                let conj = j.basis_change.adjoint() * a.matrix() * &j.basis_change;
                let (x, y) = (eigvalsh(a.matrix()), eigvalsh(&conj));
                assert!(x.iter().zip(y.iter()).all(|(p, q)| (p - q).abs() < 1e-9));
            }
        }
    }

    fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (n, m) = (a.nrows(), b.nrows());
        let mut out = CMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(a);
        out.view_mut((n, n), (m, m)).copy_from(b);
        out
    }

    #[test]
    fn direct_sum_state_splits_with_weights() {
        // sqrt(0.3) |phi+> in the first block pair, sqrt(0.7) |phi+> in the second.
        let phi = PureState::phi_plus();
        let mut amp = CVector::zeros(16);
        for i in 0..2 {
            for j in 0..2 {
                let v = phi.amplitudes()[2 * i + j];
                amp[4 * i + j] += v * 0.3f64.sqrt();
                amp[4 * (i + 2) + (j + 2)] += v * 0.7f64.sqrt();
            }
        }
        let state = PureState::new(amp, vec![4, 4]).unwrap().density();
        let h = |m: CMatrix| m * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let obs = |a: CMatrix, b: CMatrix| Observable::dichotomic(direct_sum(&a, &b)).unwrap();
        let exp = Experiment::new(
            state,
            vec![obs(pauli_z(), pauli_z()), obs(pauli_x(), pauli_x())],
            vec![obs(h(pauli_z() + pauli_x()), h(pauli_z() + pauli_x())), obs(h(pauli_z() - pauli_x()), h(pauli_z() - pauli_x()))],
        )
        .unwrap();
        let mut ps: Vec<f64> = decompose_strategy(&exp).unwrap().iter().map(|b| b.0).collect();
        ps.sort_by(f64::total_cmp);
        assert_eq!(ps.len(), 2);
        assert!((ps[0] - 0.3).abs() < 1e-10 && (ps[1] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn random_strategies_recombine() {
        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let exp = Experiment::new(
                random_density(&[4, 4], 3, &mut rng),
                vec![random_dichotomic(4, &mut rng), random_dichotomic(4, &mut rng)],
                vec![random_dichotomic(4, &mut rng), random_dichotomic(4, &mut rng)],
            )
            .unwrap();
            let branches = decompose_strategy(&exp).unwrap();
            let total: f64 = branches.iter().map(|b| b.0).sum();
            assert!((total - 1.0).abs() < 1e-10);
            let stats = recombined_statistics(&branches).unwrap();
            assert!(stats.max_deviation(&statistics_of(&exp).unwrap()).unwrap() < 1e-9);
            let s = chsh_value(&exp).unwrap().s;
            assert!((recombined_chsh(&branches).unwrap() - s).abs() < 1e-8);
        }
    }

    #[test]
    fn tail_bound_monotone_and_hoeffding_at_r0() {
        let p = 0.85;
        let b = |m, r, mu| tail_bound(&TailBoundInput { n: 2000, m, r, p, mu }).unwrap();
        for k in 1..20 {
            let mu = 0.01 * k as f64;
            assert!(b(400, 2, mu + 0.01) <= b(400, 2, mu));
            assert!(b(500, 2, mu) <= b(400, 2, mu));
            assert!((b(400, 0, mu) - hoeffding_bound(400, mu)).abs() < 1e-14);
        }
    }

    #[test]
    fn monte_carlo_respects_bound() {
        let p = (PI / 8.0).cos().powi(2);
        let emp = monte_carlo_tail(100, p, 0.05, 20_000, 3);
        assert!(emp <= hoeffding_bound(100, 0.05));
    }

    #[test]
    fn tail_bound_rejects_m_equal_r() {
        let r = tail_bound(&TailBoundInput { n: 10, m: 5, r: 5, p: 0.8, mu: 0.1 });
        assert!(r.is_err());
    }

    #[test]
    fn mu_inversion_hits_target() {
        let mu = mu_for_epsilon(1000, 500, 3, 0.85, 1e-3).unwrap();
        let b = tail_bound(&TailBoundInput { n: 1000, m: 500, r: 3, p: 0.85, mu }).unwrap();
        assert!((b - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn eve_eigenvalue_limits() {
        let pure = BellSpectrum::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        let (l0, l1) = eve_eigenvalues(&pure, 0.0).unwrap();
        assert!((l0 - 0.5).abs() < 1e-15 && l1.abs() < 1e-15);
    }

    /// Eve's blocks built by measuring the purification directly.
    fn explicit_eve_blocks(spec: &BellSpectrum, theta: f64) -> Vec<f64> {
        // lambda_st with (s, t): 00 phi+, 01 phi-, 10 psi+, 11 psi-.
        let lam = [spec.phi_plus, spec.phi_minus, spec.psi_plus, spec.psi_minus];
        let mut psi = CVector::zeros(16);
        for r in 0..2 {
            for s in 0..2 {
                for t in 0..2 {
                    let amp = lam[2 * s + t].sqrt() * if r * t == 1 { -1.0 } else { 1.0 } / 2f64.sqrt();
                    psi[(r * 2 + (r ^ s)) * 4 + 2 * s + t] += c(amp, 0.0);
                }
            }
        }
        let (q0, q1) = (theta.cos(), theta.sin());
        let bob = [[q0, q1], [q1, -q0]];
        let mut eig = Vec::new();
        for b in bob {
            let mut m = CMatrix::zeros(4, 4);
            for a in 0..2 {
                let chi = CVector::from_fn(4, |e, _| {
                    (0..2).map(|k| psi[(a * 2 + k) * 4 + e] * b[k]).sum::<C64>()
                });
                m += &chi * chi.adjoint();
            }
            eig.extend(eigvalsh(&m).iter().copied());
        }
        eig.sort_by(|a, b| b.total_cmp(a));
        eig
    }

    #[test]
    fn eve_eigenvalues_match_explicit_construction() {
        let mut rng = rng_from_seed(17);
        for _ in 0..20 {
            let mut l: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
            let tot: f64 = l.iter().sum();
            l.iter_mut().for_each(|x| *x /= tot);
            let spec = BellSpectrum::new(l).unwrap();
            let theta = rng.random::<f64>() * PI;
            let (l0, l1) = eve_eigenvalues(&spec, theta).unwrap();
            let e = explicit_eve_blocks(&spec, theta);
            let expect = [l0, l0, l1, l1];
            for k in 0..4 {
                assert!((e[k] - expect[k]).abs() < 1e-10, "{e:?} vs {expect:?}");
            }
            assert!(e[4..].iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn theta_grid_minimum_at_endpoints() {
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            let mut l: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
            let tot: f64 = l.iter().sum();
            l.iter_mut().for_each(|x| *x /= tot);
            let spec = BellSpectrum::new(l).unwrap();
            let end = hye_direct(&spec, 0.0).unwrap().min(hye_direct(&spec, PI / 4.0).unwrap());
            for k in 0..=200 {
                let theta = PI / 2.0 * k as f64 / 200.0;
                assert!(hye_direct(&spec, theta).unwrap() >= end - 1e-12);
            }
        }
    }

    #[test]
    fn key_rate_limits() {
        let k = key_rate(&KeyRateInput { s: TSIRELSON, q: 0.0 }).unwrap();
        assert!((k.rate - 1.0).abs() < 1e-12);
        assert!(hye_bound(2.0).unwrap().abs() < 1e-12);
        assert!(hye_bound(2.9).is_err());
        let k = key_rate(&KeyRateInput { s: 2.0, q: 0.1 }).unwrap();
        assert!(k.raw < 0.0 && k.rate == 0.0);
    }
}
