//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Build a square matrix from real row-major entries.
pub fn real_matrix(d: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(d, d, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn pauli_x() -> CMatrix {
    real_matrix(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    real_matrix(2, &[1.0, 0.0, 0.0, -1.0])
}

/// The real antisymmetric product XZ = [[0,-1],[1,0]].
pub fn xz() -> CMatrix {
    real_matrix(2, &[0.0, -1.0, 1.0, 0.0])
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    real_matrix(2, &[s, s, s, -s])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a, It: IntoIterator<Item = &'a CMatrix>>(ms: It) -> CMatrix {
    ms.into_iter()
        .fold(identity(1), |acc, m| acc.kronecker(m))
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

pub fn real_part(m: &CMatrix) -> CMatrix {
    m.map(|z| c(z.re, 0.0))
}

pub fn imag_part(m: &CMatrix) -> CMatrix {
    m.map(|z| c(z.im, 0.0))
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

pub fn is_real(m: &CMatrix, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues ascend. Each eigenvector is phase-fixed so that its first
/// non-negligible component is real and positive.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = Vec::with_capacity(d);
    let mut vecs = CMatrix::zeros(d, d);
    for (k, &j) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[j]);
        let mut col = eig.eigenvectors.column(j).into_owned();
        fix_phase(&mut col);
        vecs.set_column(k, &col);
    }
    (vals, vecs)
}

/// Rotate a vector so its first component above 1e-10 in modulus is real positive.
pub fn fix_phase(v: &mut CVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-10).copied() {
        let ph = z.conj() / z.norm();
        *v *= ph;
    }
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&x| f(x))));
    &vecs * diag * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix. Eigenvalues down to
/// `-tol_psd` are clamped to zero.
pub fn sqrtm_psd(m: &CMatrix, tol_psd: f64) -> Option<CMatrix> {
    let (vals, vecs) = eigh(m);
    if vals.first().is_some_and(|&v| v < -tol_psd) {
        return None;
    }
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| c(x.max(0.0).sqrt(), 0.0)),
    ));
    Some(&vecs * diag * vecs.adjoint())
}

/// Whether the Hermitian matrix m has no eigenvalue below -tol, by
/// attempting a Cholesky factorization of m + tol I. Much cheaper than a
/// full eigendecomposition for large states.
pub fn is_psd_within(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + tol;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// exp(-i H t) for Hermitian H.
pub fn unitary_evolution(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_fn(h, |x| C64::from_polar(1.0, -x * t))
}

/// Matrix exponential of a general square matrix (Pade approximant).
pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn rank(m: &CMatrix, threshold: f64) -> usize {
    m.clone().singular_values().iter().filter(|&&s| s > threshold).count()
}

/// Extend orthonormal columns to a unitary matrix of size `d`.
pub fn complete_basis(cols: &CMatrix, d: usize) -> CMatrix {
    let mut basis: Vec<CVector> = cols.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while basis.len() < d && e < d {
        let mut v = CVector::zeros(d);
        v[e] = ONE;
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / c(n, 0.0));
        }
        e += 1;
    }
    CMatrix::from_columns(&basis)
}

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

fn index_of(digs: &[usize], dims: &[usize]) -> usize {
    digs.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Index map for reordering tensor factors: new site `k` is old site `perm[k]`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    (0..total)
        .map(|new_idx| {
            let nd = digits(new_idx, &new_dims);
            let mut od = vec![0; dims.len()];
            for (k, &p) in perm.iter().enumerate() {
                od[p] = nd[k];
            }
            index_of(&od, dims)
        })
        .collect()
}

pub fn is_permutation(perm: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    perm.len() == n
        && perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
}

/// Reorder the tensor factors of a vector; new site `k` is old site `perm[k]`.
pub fn permute_vector(v: &CVector, dims: &[usize], perm: &[usize]) -> CVector {
    let map = permutation_map(dims, perm);
    CVector::from_iterator(map.len(), map.iter().map(|&o| v[o]))
}

/// Reorder the tensor factors of an operator; new site `k` is old site `perm[k]`.
pub fn permute_matrix(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let map = permutation_map(dims, perm);
    let n = map.len();
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// Partial trace keeping the listed sites (in ascending order).
pub fn partial_trace_keep(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let perm: Vec<usize> = keep.iter().chain(traced.iter()).copied().collect();
    let pm = permute_matrix(m, dims, &perm);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    CMatrix::from_fn(dk, dk, |i, j| {
        (0..dt).map(|t| pm[(i * dt + t, j * dt + t)]).sum()
    })
}

/// Embed an operator acting on one site into the full tensor product.
pub fn embed(op: &CMatrix, dims: &[usize], site: usize) -> CMatrix {
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    kron(&kron(&identity(left), op), &identity(right))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xz_is_product_of_paulis() {
        assert!(max_abs_diff(&(pauli_x() * pauli_z()), &xz()) < 1e-15);
    }

    #[test]
    fn eigh_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(2.0, 0.0)]);
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![c(vals[0], 0.0), c(vals[1], 0.0)]));
        assert!(max_abs_diff(&(&vecs * diag * vecs.adjoint()), &m) < 1e-12);
        assert!(vecs[(0, 0)].im.abs() < 1e-15 && vecs[(0, 0)].re > 0.0);
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = pauli_x();
        let b = pauli_z();
        let ab = kron(&a, &b);
        let ba = permute_matrix(&ab, &[2, 2], &[1, 0]);
        assert!(max_abs_diff(&ba, &kron(&b, &a)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = real_matrix(2, &[0.7, 0.1, 0.1, 0.3]);
        let b = real_matrix(3, &[0.5, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25]);
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace_keep(&ab, &[2, 3], &[0]), &a) < 1e-14);
        assert!(max_abs_diff(&partial_trace_keep(&ab, &[2, 3], &[1]), &b) < 1e-14);
    }

    #[test]
    fn hermitian_evolution_matches_pade() {
        let h = real_matrix(2, &[0.3, 1.1, 1.1, -0.4]);
        let t = 0.7;
        let u = unitary_evolution(&h, t);
        let pade = expm(&(h * c(0.0, -t)));
        assert!(max_abs_diff(&u, &pade) < 1e-12);
    }

    #[test]
    fn completion_is_unitary() {
        let v = CMatrix::from_column_slice(3, 1, &[c(0.6, 0.0), c(0.0, 0.8), ZERO]);
        let u = complete_basis(&v, 3);
        assert!(unitarity_deviation(&u) < 1e-12);
    }
}
