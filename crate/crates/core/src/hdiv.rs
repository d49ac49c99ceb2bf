//! Quaternions, quaternionic matrices and the time-ordered quaternionic
//! non-local box.
//!
//! Amplitudes multiply basis kets from the left, and a gate applied later
//! multiplies the amplitudes from the left, so order of application is
//! order of left multiplication.

use crate::error::{Error, Result};
use rand::Rng;
use std::ops::{Add, Mul, Neg, Sub};

/// q = a + b i + c j + d k.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

pub fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    p * q
}

pub fn qconj(q: Quaternion) -> Quaternion {
    q.conj()
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
        )
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, q: Quaternion) -> Quaternion {
        Quaternion::new(self.a + q.a, self.b + q.b, self.c + q.c, self.d + q.d)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, q: Quaternion) -> Quaternion {
        self + (-q)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// Dense row-major quaternionic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidArgument("non-finite quaternion entry".into()));
        }
        Ok(QuatMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuatMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Quaternion::ONE; n])
    }

    pub fn diagonal(d: &[Quaternion]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (k, &q) in d.iter().enumerate() {
            m.data[k * d.len() + k] = q;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        self.data[r * self.cols + c]
    }

    /// Kronecker product with a real matrix on the other factor. Real
    /// entries commute with everything, so this is unambiguous.
    pub fn kron_real(&self, real: &[f64], n: usize, self_first: bool) -> QuatMatrix {
        let (r, c) = (self.rows * n, self.cols * n);
        let mut out = QuatMatrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j).scale(real[k * n + l]);
                        let (row, col) = if self_first { (i * n + k, j * n + l) } else { (k * self.rows + i, l * self.cols + j) };
                        out.data[row * c + col] = v;
                    }
                }
            }
        }
        out
    }
}

pub fn qmat_mul(x: &QuatMatrix, y: &QuatMatrix) -> Result<QuatMatrix> {
    if x.cols != y.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    let mut out = QuatMatrix::zeros(x.rows, y.cols);
    for i in 0..x.rows {
        for j in 0..y.cols {
            out.data[i * y.cols + j] = (0..x.cols).fold(Quaternion::ZERO, |acc, k| acc + x.get(i, k) * y.get(k, j));
        }
    }
    Ok(out)
}

/// Transpose followed by entrywise conjugation.
pub fn qmat_dagger(x: &QuatMatrix) -> QuatMatrix {
    let mut out = QuatMatrix::zeros(x.cols, x.rows);
    for i in 0..x.rows {
        for j in 0..x.cols {
            out.data[j * x.rows + i] = x.get(i, j).conj();
        }
    }
    out
}

pub fn is_quat_unitary(u: &QuatMatrix, tol: f64) -> bool {
    if u.rows != u.cols {
        return false;
    }
    let Ok(p) = qmat_mul(u, &qmat_dagger(u)) else {
        return false;
    };
    let id = QuatMatrix::identity(u.rows);
    p.data.iter().zip(&id.data).all(|(a, b)| (*a - *b).norm() <= tol)
}

/// M psi with matrix entries on the left of the amplitudes.
pub fn qmat_apply(m: &QuatMatrix, psi: &[Quaternion]) -> Result<Vec<Quaternion>> {
    if m.cols != psi.len() {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {} columns", psi.len(), m.cols)));
    }
    Ok((0..m.rows)
        .map(|i| (0..m.cols).fold(Quaternion::ZERO, |acc, k| acc + m.get(i, k) * psi[k]))
        .collect())
}

/// sum_r conj(phi_r) psi_r.
pub fn qinner(phi: &[Quaternion], psi: &[Quaternion]) -> Quaternion {
    phi.iter().zip(psi).fold(Quaternion::ZERO, |acc, (p, q)| acc + p.conj() * *q)
}

/// diag(1, i).
pub fn r_i() -> QuatMatrix {
    QuatMatrix::diagonal(&[Quaternion::ONE, Quaternion::I])
}

/// diag(1, j).
pub fn r_j() -> QuatMatrix {
    QuatMatrix::diagonal(&[Quaternion::ONE, Quaternion::J])
}

/// Gate on a single qubit of a two-qubit register (site 0 slow).
pub fn local_gate(g: &QuatMatrix, site: usize) -> QuatMatrix {
    let id = [1.0, 0.0, 0.0, 1.0];
    g.kron_real(&id, 2, site == 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxTranscript {
    pub a: u8,
    pub b: u8,
    pub x: u8,
    pub y: u8,
    /// (time slot 1..=5, party) for each gate, in time order.
    pub applied_times: Vec<(u8, Party)>,
    /// Outcome probabilities indexed by 2x + y.
    pub probabilities: [f64; 4],
}

/// (|00> + k |11>)/sqrt2.
pub fn box_initial_state() -> Vec<Quaternion> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![Quaternion::real(h), Quaternion::ZERO, Quaternion::ZERO, Quaternion::K.scale(h)]
}

/// Final state and gate log for inputs (a, b). Alice applies R_i at t1
/// (a = 0) or t3 (a = 1); Bob applies R_j at t4 (b = 0) or t2 (b = 1).
pub fn box_final_state(a: u8, b: u8) -> (Vec<Quaternion>, Vec<(u8, Party)>) {
    let ta = if a == 0 { 1 } else { 3 };
    let tb = if b == 0 { 4 } else { 2 };
    let mut log = vec![(ta, Party::Alice), (tb, Party::Bob)];
    log.sort_by_key(|e| e.0);
    let mut psi = box_initial_state();
    for &(_, party) in &log {
        let g = match party {
            Party::Alice => local_gate(&r_i(), 0),
            Party::Bob => local_gate(&r_j(), 1),
        };
        psi = qmat_apply(&g, &psi).expect("4x4 gate on 4 amplitudes");
    }
    (psi, log)
}

/// Probabilities of (x, y) for measurements in |+>/|->, x = 0 for |+>.
/// The measurement vectors are real, so the overlap is unambiguous.
pub fn plus_minus_probabilities(psi: &[Quaternion]) -> [f64; 4] {
    let pm = [[0.5f64.sqrt(), 0.5f64.sqrt()], [0.5f64.sqrt(), -(0.5f64.sqrt())]];
    let mut p = [0.0; 4];
    for x in 0..2 {
        for y in 0..2 {
            let amp = (0..4).fold(Quaternion::ZERO, |acc, r| acc + psi[r].scale(pm[x][r / 2] * pm[y][r % 2]));
            p[2 * x + y] = amp.norm_sqr();
        }
    }
    p
}

pub fn nonlocal_box_run<R: Rng + ?Sized>(a: u8, b: u8, rng: &mut R) -> BoxTranscript {
    let (psi, applied_times) = box_final_state(a & 1, b & 1);
    let probabilities = plus_minus_probabilities(&psi);
    let u: f64 = rng.random::<f64>() * probabilities.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut k = 3;
    for (idx, &p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            k = idx;
            break;
        }
    }
    BoxTranscript {
        a: a & 1,
        b: b & 1,
        x: (k / 2) as u8,
        y: (k % 2) as u8,
        applied_times,
        probabilities,
    }
}

/// Win counts (x xor y == a b) for each input pair over `runs` samples.
pub fn box_win_table(runs: usize, seed: u64) -> [[usize; 2]; 2] {
    let mut rng = crate::qcore::random::rng_from_seed(seed);
    let mut wins = [[0; 2]; 2];
    for a in 0..2u8 {
        for b in 0..2u8 {
            for _ in 0..runs {
                let t = nonlocal_box_run(a, b, &mut rng);
                if t.x ^ t.y == a & b {
                    wins[a as usize][b as usize] += 1;
                }
            }
        }
    }
    wins
}

/// S = 8p - 4 with p the win rate over uniform inputs.
pub fn box_chsh_value(runs: usize, seed: u64) -> f64 {
    let wins = box_win_table(runs.max(1), seed);
    let total: usize = wins.iter().flatten().sum();
    let p = total as f64 / (4 * runs.max(1)) as f64;
    8.0 * p - 4.0
}

/// Best win probability over the 16 deterministic local strategies
/// x = f(a), y = g(b).
pub fn classical_max_win() -> f64 {
    let mut best = 0.0f64;
    for f in 0..4u8 {
        for g in 0..4u8 {
            let mut wins = 0;
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let x = (f >> a) & 1;
                    let y = (g >> b) & 1;
                    if x ^ y == a & b {
                        wins += 1;
                    }
                }
            }
            best = best.max(wins as f64 / 4.0);
        }
    }
    best
}
