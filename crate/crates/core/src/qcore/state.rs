use super::linalg::*;
use super::tol::Tolerances;
use crate::error::{Error, Result};

/// Normalized state vector on a tensor product of sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: CVector,
    dims: Vec<usize>,
}

/// Density operator on a tensor product of sites. Site 0 is the slowest factor.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

/// Schmidt decomposition psi = sum_j coefficients[j] |a_j>|b_j>.
#[derive(Clone, Debug)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    pub basis_a: CMatrix,
    pub basis_b: CMatrix,
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid site dimensions {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != len {
        return Err(Error::DimensionMismatch(format!(
            "sites {dims:?} give {total}, data has {len}"
        )));
    }
    Ok(())
}

impl PureState {
    pub fn new(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        Self::new_with_tol(amps, dims, &Tolerances::default())
    }

    pub fn new_with_tol(amps: CVector, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite amplitude".into()));
        }
        let dev = (amps.norm() - 1.0).abs();
        if dev > tol.norm {
            return Err(Error::NotNormalized(dev));
        }
        Ok(PureState { amps, dims })
    }

    /// Rescale to unit norm before validating.
    pub fn normalized(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(1.0));
        }
        Self::new(amps / c(n, 0.0), dims)
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {total}")));
        }
        let mut v = CVector::zeros(total);
        v[index] = ONE;
        Self::new(v, dims)
    }

    /// (|00> + |11>)/sqrt(2).
    pub fn phi_plus() -> Self {
        Self::from_schmidt(&[std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap()
    }

    /// sum_j coefficients[j] |jj> on two sites of dimension `coefficients.len()`.
    pub fn from_schmidt(coefficients: &[f64]) -> Result<Self> {
        let d = coefficients.len();
        let mut v = CVector::zeros(d * d);
        for (j, &l) in coefficients.iter().enumerate() {
            v[j * d + j] = c(l, 0.0);
        }
        Self::new(v, vec![d, d])
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: outer(&self.amps, &self.amps),
            dims: self.dims.clone(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amps: kron_vec(&self.amps, &other.amps),
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
        }
    }

    /// Reorder sites: new site `k` is old site `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<PureState> {
        if !is_permutation(perm, self.dims.len()) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a site permutation")));
        }
        Ok(PureState {
            amps: permute_vector(&self.amps, &self.dims, perm),
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
        })
    }

    pub fn apply(&self, u: &CMatrix) -> Result<PureState> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("operator does not match state".into()));
        }
        PureState::new(u * &self.amps, self.dims.clone())
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::new_with_tol(matrix, dims, &Tolerances::default())
    }

    pub fn new_with_tol(matrix: CMatrix, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("density matrix is not square".into()));
        }
        check_dims(&dims, matrix.nrows())?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        let herm = hermiticity_deviation(&matrix);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized((tr - 1.0).abs()));
        }
        if !is_psd_within(&matrix, tol.psd) {
            return Err(Error::NotPositive(eigvalsh(&matrix)[0]));
        }
        Ok(DensityOperator { matrix, dims })
    }

    /// Relabel the site structure without revalidating the matrix.
    pub(crate) fn with_dims_unchecked(self, dims: Vec<usize>) -> DensityOperator {
        debug_assert_eq!(dims.iter().product::<usize>(), self.matrix.nrows());
        DensityOperator { matrix: self.matrix, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::new(identity(d) / c(d as f64, 0.0), dims)
    }

    /// Convex combination sum_k w_k rho_k.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let dims = first.1.dims.clone();
        let mut m = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if rho.dims != dims {
                return Err(Error::DimensionMismatch("mixture components differ".into()));
            }
            m += &rho.matrix * c(*w, 0.0);
        }
        Self::new(m, dims)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("operator does not match state".into()));
        }
        Ok(trace_product(&self.matrix, op).re)
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: kron(&self.matrix, &other.matrix),
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
        }
    }

    pub fn permute(&self, perm: &[usize]) -> Result<DensityOperator> {
        if !is_permutation(perm, self.dims.len()) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a site permutation")));
        }
        Ok(DensityOperator {
            matrix: permute_matrix(&self.matrix, &self.dims, perm),
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
        })
    }

    /// Reduced state on the kept sites, in ascending site order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        if let Some(&bad) = keep.iter().find(|&&k| k >= self.dims.len()) {
            return Err(Error::InvalidSite(bad));
        }
        if keep.is_empty() {
            return Err(Error::InvalidArgument("nothing left after partial trace".into()));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        Ok(DensityOperator {
            matrix: partial_trace_keep(&self.matrix, &self.dims, &kept),
            dims: kept.iter().map(|&k| self.dims[k]).collect(),
        })
    }

    /// Conjugate by `u` (which must preserve the site structure's total dimension).
    pub fn evolve(&self, u: &CMatrix) -> Result<DensityOperator> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("operator does not match state".into()));
        }
        DensityOperator::new(u * &self.matrix * u.adjoint(), self.dims.clone())
    }

    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        eigh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }

    /// Purification with an extra register appended as the last site.
    pub fn purify(&self) -> PureState {
        let (vals, vecs) = self.eigen();
        let support: Vec<usize> = (0..vals.len()).rev().filter(|&k| vals[k] > 1e-14).collect();
        let r = support.len().max(1);
        let d = self.dim();
        let mut v = CVector::zeros(d * r);
        for (slot, &k) in support.iter().enumerate() {
            let w = c(vals[k].sqrt(), 0.0);
            for i in 0..d {
                v[i * r + slot] += vecs[(i, k)] * w;
            }
        }
        let n = v.norm();
        let mut dims = self.dims.clone();
        dims.push(r);
        PureState {
            amps: v / c(n, 0.0),
            dims,
        }
    }
}

/// tr(a b) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

fn same_shape(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dims != sigma.dims {
        return Err(Error::DimensionMismatch(format!(
            "sites {:?} vs {:?}",
            rho.dims, sigma.dims
        )));
    }
    Ok(())
}

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_shape(rho, sigma)?;
    let tol = Tolerances::default();
    // Eigenvalues at rounding level are zeroed before taking square roots;
    // otherwise a 1e-17 eigenvalue of a pure state contributes 3e-9.
    const FLOOR: f64 = 1e-14;
    let (vals, vecs) = eigh(&rho.matrix);
    if vals.first().is_some_and(|&v| v < -tol.psd) {
        return Err(Error::NotPositive(vals[0]));
    }
    let diag = CVector::from_iterator(vals.len(), vals.iter().map(|&x| c(if x > FLOOR { x.sqrt() } else { 0.0 }, 0.0)));
    let s = &vecs * CMatrix::from_diagonal(&diag) * vecs.adjoint();
    let inner = &s * &sigma.matrix * &s;
    let root: f64 = eigvalsh(&inner).iter().map(|&x| if x > FLOOR { x.sqrt() } else { 0.0 }).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// <psi|sigma|psi>.
pub fn fidelity_pure(psi: &PureState, sigma: &DensityOperator) -> Result<f64> {
    if psi.dims != sigma.dims {
        return Err(Error::DimensionMismatch("state and operator sites differ".into()));
    }
    Ok((psi.amps.dotc(&(&sigma.matrix * &psi.amps))).re.clamp(0.0, 1.0))
}

/// (1/2) ||rho - sigma||_1.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_shape(rho, sigma)?;
    Ok(half_trace_norm_hermitian(&(&rho.matrix - &sigma.matrix)))
}

/// (1/2) sum |eigenvalues| of a Hermitian matrix.
pub fn half_trace_norm_hermitian(m: &CMatrix) -> f64 {
    0.5 * eigvalsh(m).iter().map(|x| x.abs()).sum::<f64>()
}

/// Schmidt decomposition across the cut between site 0 and site 1.
pub fn schmidt(psi: &PureState) -> Result<Schmidt> {
    if psi.dims.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Schmidt decomposition needs two sites, got {}",
            psi.dims.len()
        )));
    }
    let (da, db) = (psi.dims[0], psi.dims[1]);
    let m = CMatrix::from_fn(da, db, |i, j| psi.amps[i * db + j]);
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    // M = sum_k s_k u_k (v_k)^dagger, so |b_k> is the k-th row of V^T.
    let basis_a = CMatrix::from_fn(da, r, |i, k| u[(i, order[k])]);
    let basis_b = CMatrix::from_fn(db, r, |j, k| vt[(order[k], j)]);
    Ok(Schmidt {
        coefficients,
        basis_a,
        basis_b,
    })
}

impl Schmidt {
    pub fn reconstruct(&self) -> CVector {
        let da = self.basis_a.nrows();
        let db = self.basis_b.nrows();
        let mut v = CVector::zeros(da * db);
        for (k, &l) in self.coefficients.iter().enumerate() {
            let a = self.basis_a.column(k).into_owned();
            let b = self.basis_b.column(k).into_owned();
            v += kron_vec(&a, &b) * c(l, 0.0);
        }
        v
    }
}
