use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::random::rng_stream;
use crate::qcore::state::half_trace_norm_hermitian;
use crate::qcore::{statistics_of, DensityOperator, Experiment, Observable, PureState};
use nalgebra::Cholesky;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// One factor of a supported gate.
#[derive(Clone, Debug, PartialEq)]
pub enum GateBlock {
    /// Real orthogonal 2x2 matrix.
    Real1(CMatrix),
    /// diag(1, 1, 1, -1) on two qubits.
    CtrlZ,
}

/// Tensor product of supported blocks, qubit 0 first.
#[derive(Clone, Debug, PartialEq)]
pub struct GatePattern {
    pub blocks: Vec<GateBlock>,
}

fn ctrl_z() -> CMatrix {
    real_matrix(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.])
}

/// Split t = a (x) r with a of size k, normalized so r is unitary when t is.
fn kron_factor(t: &CMatrix, k: usize) -> Option<(CMatrix, CMatrix)> {
    let d = t.nrows();
    if !d.is_multiple_of(k) {
        return None;
    }
    let m = d / k;
    let block = |i: usize, j: usize| t.view((i * m, j * m), (m, m)).into_owned();
    let (mut bi, mut bj, mut bn) = (0, 0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let n = block(i, j).norm();
            if n > bn {
                (bi, bj, bn) = (i, j, n);
            }
        }
    }
    if bn == 0.0 {
        return None;
    }
    let r = block(bi, bj) * c((m as f64).sqrt() / bn, 0.0);
    let rr = r.dotc(&r);
    let mut a = CMatrix::from_fn(k, k, |i, j| r.dotc(&block(i, j)) / rr);
    let mut r = r;
    // Put the phase of a's largest entry into r.
    let z = a[(bi, bj)];
    let ph = z / z.norm();
    a /= ph;
    r *= ph;
    if max_abs_diff(&kron(&a, &r), t) > 1e-9 {
        return None;
    }
    Some((a, r))
}

impl GatePattern {
    /// Recognize a real single-qubit unitary, CTRL-Z, or a tensor product of
    /// those, up to a global sign.
    pub fn identify(t: &CMatrix) -> Result<Self> {
        let d = t.nrows();
        if !t.is_square() || d < 2 || !d.is_power_of_two() {
            return Err(Error::Unsupported(format!("gate of shape {:?}", t.shape())));
        }
        if unitarity_deviation(t) > 1e-9 {
            return Err(Error::Unsupported("gate is not unitary".into()));
        }
        if !is_real(t, 1e-12) {
            return Err(Error::Unsupported("only real gates can be tested".into()));
        }
        let mut blocks = Vec::new();
        let mut rest = t.clone();
        loop {
            let n = rest.nrows();
            if n == 2 {
                blocks.push(GateBlock::Real1(real_part(&rest)));
                break;
            }
            // A global sign does not change any state the gate prepares.
            if n == 4 && (max_abs_diff(&rest, &ctrl_z()) < 1e-9 || max_abs_diff(&rest, &-ctrl_z()) < 1e-9) {
                blocks.push(GateBlock::CtrlZ);
                break;
            }
            if let Some((a, r)) = kron_factor(&rest, 2).filter(|(a, r)| is_real(a, 1e-9) && is_real(r, 1e-9)) {
                blocks.push(GateBlock::Real1(real_part(&a)));
                rest = real_part(&r);
                continue;
            }
            if let Some((a, r)) = kron_factor(&rest, 4) {
                let sign = if max_abs_diff(&a, &ctrl_z()) < 1e-9 {
                    1.0
                } else if max_abs_diff(&a, &-ctrl_z()) < 1e-9 {
                    -1.0
                } else {
                    return Err(Error::Unsupported("gate is not a product of supported blocks".into()));
                };
                blocks.push(GateBlock::CtrlZ);
                rest = real_part(&r) * c(sign, 0.0);
                continue;
            }
            return Err(Error::Unsupported("gate is not a product of supported blocks".into()));
        }
        Ok(GatePattern { blocks })
    }

    pub fn qubits(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                GateBlock::Real1(_) => 1,
                GateBlock::CtrlZ => 2,
            })
            .sum()
    }

    pub fn matrix(&self) -> CMatrix {
        kron_all(
            self.blocks
                .iter()
                .map(|b| match b {
                    GateBlock::Real1(m) => m.clone(),
                    GateBlock::CtrlZ => ctrl_z(),
                })
                .collect::<Vec<_>>()
                .iter(),
        )
    }
}

fn word_matrix(word: usize, n: usize, letters: &[CMatrix]) -> CMatrix {
    let base = letters.len();
    let mut digs = vec![0; n];
    let mut w = word;
    for k in (0..n).rev() {
        digs[k] = w % base;
        w /= base;
    }
    kron_all(digs.iter().map(|&k| &letters[k]))
}

fn letters_ixzd() -> Vec<CMatrix> {
    let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![identity(2), pauli_x(), pauli_z(), (pauli_x() + pauli_z()) * s]
}

/// Products of {I, X, Z, D} on n qubits; setting index is the base-4 word,
/// qubit 0 most significant.
pub fn gate_setting_observables(n: usize) -> Vec<Observable> {
    let letters = letters_ixzd();
    (0..4usize.pow(n as u32))
        .map(|w| Observable::dichotomic(word_matrix(w, n, &letters)).expect("Pauli product"))
        .collect()
}

/// n EPR pairs with A holding the first qubit of each pair.
fn epr_pairs(n: usize) -> PureState {
    let d = 1usize << n;
    let v = CVector::from_fn(d * d, |i, _| if i / d == i % d { ONE } else { ZERO });
    PureState::normalized(v, vec![d, d]).expect("EPR pairs")
}

/// Honest devices: experiment 1 on the EPR pairs, experiment 2 after G on A
/// and H on B, experiment 3 after G on A only; all measure the full
/// {I, X, Z, D} product settings.
pub fn gate_test_experiments(g: &CMatrix, h: &CMatrix, n: usize) -> Result<[Experiment; 3]> {
    let d = 1usize << n;
    if g.shape() != (d, d) || h.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("gates must act on {n} qubits")));
    }
    let phi = epr_pairs(n);
    let obs = gate_setting_observables(n);
    let mk = |u: CMatrix| -> Result<Experiment> {
        Experiment::new(phi.apply(&u)?.density(), obs.clone(), obs.clone())
    };
    Ok([mk(identity(d * d))?, mk(kron(g, h))?, mk(kron(g, &identity(d)))?])
}

/// Correlators <P (x) Q> for P, Q in {I, X, Z}^n (base-3 words).
#[derive(Clone, Debug, PartialEq)]
pub struct PauliMoments {
    pub qubits: usize,
    pub values: Vec<f64>,
}

impl PauliMoments {
    pub fn words(&self) -> usize {
        3usize.pow(self.qubits as u32)
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.words() + q]
    }

    pub fn max_deviation(&self, other: &PauliMoments) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn word3_to_word4(w: usize, n: usize) -> usize {
    let mut out = 0;
    let mut pow = 1;
    let mut w = w;
    for _ in 0..n {
        out += (w % 3) * pow;
        w /= 3;
        pow *= 4;
    }
    out
}

/// Moment table read from the statistics of an experiment using the
/// {I, X, Z, D}^n settings of [`gate_setting_observables`].
pub fn real_pauli_moments(exp: &Experiment, n: usize) -> Result<PauliMoments> {
    let k = 4usize.pow(n as u32);
    if exp.observables_a().len() != k || exp.observables_b().len() != k {
        return Err(Error::InvalidArgument(format!("expected {k} settings per side")));
    }
    let stats = statistics_of(exp)?;
    let w = 3usize.pow(n as u32);
    let values = (0..w * w)
        .map(|i| stats.correlator(word3_to_word4(i / w, n), word3_to_word4(i % w, n)))
        .collect();
    Ok(PauliMoments { qubits: n, values })
}

fn letters_ixz() -> Vec<CMatrix> {
    vec![identity(2), pauli_x(), pauli_z()]
}

/// Exact moment table of a state on n + n qubits.
pub fn pauli_moments_of(sigma: &DensityOperator, n: usize) -> Result<PauliMoments> {
    let w = 3usize.pow(n as u32);
    let letters = letters_ixz();
    let ops: Vec<CMatrix> = (0..w).map(|p| word_matrix(p, n, &letters)).collect();
    let mut values = Vec::with_capacity(w * w);
    for p in &ops {
        for q in &ops {
            values.push(sigma.expectation(&kron(p, q))?);
        }
    }
    Ok(PauliMoments { qubits: n, values })
}

/// sigma + sum over measured Paulis of (m - sigma_m) P / d.
fn reconstruct(sigma: &DensityOperator, moments: &PauliMoments) -> Result<CMatrix> {
    let n = moments.qubits;
    let expected = pauli_moments_of(sigma, n)?;
    let w = moments.words();
    let d = sigma.dim() as f64;
    let letters = letters_ixz();
    let ops: Vec<CMatrix> = (0..w).map(|p| word_matrix(p, n, &letters)).collect();
    let mut rho = sigma.matrix().clone();
    for p in 0..w {
        for q in 0..w {
            let delta = moments.get(p, q) - expected.get(p, q);
            if delta != 0.0 {
                rho += kron(&ops[p], &ops[q]) * c(delta / d, 0.0);
            }
        }
    }
    Ok(rho)
}

#[derive(Clone, Copy, Debug)]
pub struct UniquenessOptions {
    pub starts: usize,
    pub climb_steps: usize,
    /// Largest trace distance to sigma still counted as "the same state".
    pub tol_recon: f64,
    /// Matrices with eigenvalues above -psd_slack count as PSD.
    pub psd_slack: f64,
    pub seed: u64,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        UniquenessOptions {
            starts: 20,
            climb_steps: 40,
            tol_recon: 1e-5,
            psd_slack: 1e-13,
            seed: 0,
        }
    }
}

pub fn moments_determine_state_check(sigma: &DensityOperator, moments: &PauliMoments) -> Result<bool> {
    moments_determine_state_check_with(sigma, moments, &UniquenessOptions::default())
}

/// True iff sigma is the only PSD state with these {I, X, Z}-moments, up to
/// `tol_recon` in trace distance.
///
/// Every state with the same moments is sigma plus a traceless combination
/// of Paulis containing a Y. Starting from random directions among those,
/// the largest feasible step is found by bisection and the direction is
/// locally improved to maximize the resulting trace distance.
pub fn moments_determine_state_check_with(
    sigma: &DensityOperator,
    moments: &PauliMoments,
    opts: &UniquenessOptions,
) -> Result<bool> {
    let n = moments.qubits;
    if sigma.dims() != [1 << n, 1 << n] {
        return Err(Error::DimensionMismatch("state does not match the moment table".into()));
    }
    if pauli_moments_of(sigma, n)?.max_deviation(moments) > opts.tol_recon {
        return Ok(false);
    }
    let q = 2 * n;
    let d = 1usize << q;
    let letters = vec![identity(2), pauli_x(), pauli_y(), pauli_z()];
    let free: Vec<CMatrix> = (0..4usize.pow(q as u32))
        .filter(|&w| {
            let mut w = w;
            (0..q).any(|_| {
                let y = w % 4 == 2;
                w /= 4;
                y
            })
        })
        .map(|w| word_matrix(w, q, &letters) / c(d as f64, 0.0))
        .collect();
    let base = sigma.matrix().clone();
    let slack = CMatrix::identity(d, d) * c(opts.psd_slack, 0.0);
    let direction = |t: &[f64]| -> CMatrix {
        t.iter()
            .zip(&free)
            .fold(CMatrix::zeros(d, d), |acc, (&w, p)| acc + p * c(w, 0.0))
    };
    let feasible = |delta: &CMatrix, s: f64| is_psd_real_embedding(&(&base + delta * c(s, 0.0) + &slack));
    let reach = |t: &[f64]| -> f64 {
        let delta = direction(t);
        let mut hi = 1e-9;
        while feasible(&delta, hi) {
            hi *= 2.0;
            if hi > 1e4 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if feasible(&delta, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo * half_trace_norm_hermitian(&delta)
    };
    let normalize = |mut t: Vec<f64>| {
        let n = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        t.iter_mut().for_each(|x| *x /= n);
        t
    };
    let best = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_stream(opts.seed, k as u64);
            let mut t = normalize((0..free.len()).map(|_| rng.sample(StandardNormal)).collect());
            let mut val = reach(&t);
            let mut step = 0.5;
            for _ in 0..opts.climb_steps {
                let cand = normalize(
                    t.iter()
                        .map(|&x| x + step * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                );
                let v = reach(&cand);
                if v > val {
                    (t, val) = (cand, v);
                } else {
                    step *= 0.8;
                }
            }
            val
        })
        .reduce(|| 0.0, f64::max);
    Ok(best <= opts.tol_recon)
}

/// Cholesky test on [[Re, -Im], [Im, Re]], which is PSD iff the Hermitian
/// matrix is. (A complex Cholesky cannot fail on a negative pivot.)
fn is_psd_real_embedding(m: &CMatrix) -> bool {
    let d = m.nrows();
    let r = nalgebra::DMatrix::<f64>::from_fn(2 * d, 2 * d, |i, j| {
        let z = m[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    Cholesky::new(r).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateTestReport {
    /// Largest probability deviation of each experiment from its reference.
    pub sim_residuals: [f64; 3],
    /// Trace distance between the reconstructed J/dim and J(T)/dim.
    pub choi_distance: f64,
    /// Whether the {I, X, Z}-moments of J(T)/dim pin it down.
    pub moments_unique: bool,
    pub pass: bool,
}

/// Compare three experiments with the reference gate test for `t_ref` and
/// reconstruct the Choi state of the tested gate from experiment 3.
pub fn gate_test(
    exp1: &Experiment,
    exp2: &Experiment,
    exp3: &Experiment,
    t_ref: &CMatrix,
    tol: f64,
) -> Result<GateTestReport> {
    let pattern = GatePattern::identify(t_ref)?;
    let n = pattern.qubits();
    let refs = gate_test_experiments(t_ref, t_ref, n)?;
    let mut sim_residuals = [0.0; 3];
    for (k, e) in [exp1, exp2, exp3].into_iter().enumerate() {
        sim_residuals[k] = statistics_of(e)?.max_deviation(&statistics_of(&refs[k])?)?;
    }
    let sigma = refs[2].state();
    let moments = real_pauli_moments(exp3, n)?;
    let rec = reconstruct(sigma, &moments)?;
    let choi_distance = half_trace_norm_hermitian(&(rec - sigma.matrix()));
    let moments_unique = moments_determine_state_check(sigma, &pauli_moments_of(sigma, n)?)?;
    let pass = sim_residuals.iter().all(|&r| r <= tol) && choi_distance <= tol && moments_unique;
    Ok(GateTestReport {
        sim_residuals,
        choi_distance,
        moments_unique,
        pass,
    })
}
