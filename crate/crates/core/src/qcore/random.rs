//! Seeded generators for random states, unitaries and observables.

use super::linalg::*;
use super::observable::Observable;
use super::state::{DensityOperator, PureState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-distributed unitary.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&CVector::from_fn(d, |i, _| {
        let z = r[(i, i)];
        if z.norm() > 0.0 {
            z / z.norm()
        } else {
            ONE
        }
    }));
    q * phases
}

/// Haar-distributed real orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = nalgebra::DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = nalgebra::DMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| {
        if r[(i, i)] < 0.0 {
            -1.0
        } else {
            1.0
        }
    }));
    (q * signs).map(|x| c(x, 0.0))
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let d: usize = dims.iter().product();
    let v = CVector::from_fn(d, |_, _| gaussian_complex(rng));
    PureState::normalized(v, dims.to_vec()).expect("non-zero gaussian vector")
}

/// Random density operator of the given rank (induced measure).
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityOperator {
    let d: usize = dims.iter().product();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityOperator::new(m / c(tr, 0.0), dims.to_vec()).expect("Wishart matrix is a state")
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// U diag(+-1) U^dagger with Haar U and a random number of +1 eigenvalues
/// strictly between 0 and d (for d >= 2).
pub fn random_dichotomic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Observable {
    let plus = if d >= 2 { rng.random_range(1..d) } else { 1 };
    let u = haar_unitary(d, rng);
    let diag = CMatrix::from_diagonal(&CVector::from_fn(d, |i, _| if i < plus { ONE } else { -ONE }));
    Observable::dichotomic(&u * diag * u.adjoint()).expect("conjugated signature matrix")
}

/// Random qubit observable on the Bloch sphere.
pub fn random_qubit_observable<R: Rng + ?Sized>(rng: &mut R) -> Observable {
    let v: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    Observable::from_vector([v[0] / n, v[1] / n, v[2] / n]).expect("unit Bloch vector")
}

/// Kraus operators of a random channel, from a Haar isometry.
pub fn random_kraus<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    n: usize,
    rng: &mut R,
) -> Vec<CMatrix> {
    let u = haar_unitary(out_dim * n.max(1), rng);
    let n = n.max(1);
    (0..n)
        .map(|k| CMatrix::from_fn(out_dim, in_dim, |o, x| u[(k * out_dim + o, x)]))
        .collect()
}
