use super::linalg::*;
use super::tol::Tolerances;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Eigenvalues in {+1, -1}.
    Dichotomic,
    General,
}

/// Hermitian observable. Dichotomic observables carry their eigenprojectors.
#[derive(Clone, Debug)]
pub struct Observable {
    matrix: CMatrix,
    kind: SpectrumKind,
    plus: CMatrix,
    minus: CMatrix,
}

impl PartialEq for Observable {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.matrix == other.matrix
    }
}

impl Observable {
    pub fn dichotomic(matrix: CMatrix) -> Result<Self> {
        Self::dichotomic_with_tol(matrix, &Tolerances::default())
    }

    /// Each eigenvalue is rounded to the nearer of +1 and -1; further than
    /// `tol.eig` from both is an error.
    pub fn dichotomic_with_tol(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let herm = hermiticity_deviation(&matrix);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let d = matrix.nrows();
        let (vals, vecs) = eigh(&matrix);
        let mut plus = CMatrix::zeros(d, d);
        let mut minus = CMatrix::zeros(d, d);
        for (k, &v) in vals.iter().enumerate() {
            let col = vecs.column(k).into_owned();
            let p = outer(&col, &col);
            if (v - 1.0).abs() <= tol.eig {
                plus += p;
            } else if (v + 1.0).abs() <= tol.eig {
                minus += p;
            } else {
                return Err(Error::NotDichotomic((v - 1.0).abs().min((v + 1.0).abs())));
            }
        }
        Ok(Observable {
            matrix: &plus - &minus,
            kind: SpectrumKind::Dichotomic,
            plus,
            minus,
        })
    }

    pub fn general(matrix: CMatrix) -> Result<Self> {
        let herm = hermiticity_deviation(&matrix);
        if herm > Tolerances::default().herm {
            return Err(Error::NotHermitian(herm));
        }
        let d = matrix.nrows();
        Ok(Observable {
            matrix,
            kind: SpectrumKind::General,
            plus: CMatrix::zeros(d, d),
            minus: CMatrix::zeros(d, d),
        })
    }

    pub fn x() -> Self {
        Self::dichotomic(pauli_x()).unwrap()
    }

    pub fn y() -> Self {
        Self::dichotomic(pauli_y()).unwrap()
    }

    pub fn z() -> Self {
        Self::dichotomic(pauli_z()).unwrap()
    }

    /// Identity, a dichotomic observable with the fixed outcome +1.
    pub fn identity(d: usize) -> Self {
        Self::dichotomic(identity(d)).unwrap()
    }

    /// cos(theta) Z + sin(theta) cos(phi) X + sin(theta) sin(phi) Y.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let m = pauli_z() * c(ct, 0.0)
            + pauli_x() * c(st * phi.cos(), 0.0)
            + pauli_y() * c(st * phi.sin(), 0.0);
        Self::dichotomic(m).unwrap()
    }

    /// Dichotomic observable from a real unit vector (x, y, z).
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let m = pauli_x() * c(v[0], 0.0) + pauli_y() * c(v[1], 0.0) + pauli_z() * c(v[2], 0.0);
        Self::dichotomic(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn is_dichotomic(&self) -> bool {
        self.kind == SpectrumKind::Dichotomic
    }

    /// Eigenprojector for outcome +1 (`true`) or -1 (`false`).
    pub fn projector(&self, plus: bool) -> Result<&CMatrix> {
        if self.kind != SpectrumKind::Dichotomic {
            return Err(Error::Unsupported("projectors of a general observable".into()));
        }
        Ok(if plus { &self.plus } else { &self.minus })
    }

    /// U A U^dagger.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        let m = u * &self.matrix * u.adjoint();
        match self.kind {
            SpectrumKind::Dichotomic => Self::dichotomic(m),
            SpectrumKind::General => Self::general(m),
        }
    }

    pub fn negate(&self) -> Self {
        Observable {
            matrix: -&self.matrix,
            kind: self.kind,
            plus: self.minus.clone(),
            minus: self.plus.clone(),
        }
    }

    pub fn tensor(&self, other: &Observable) -> Result<Self> {
        let m = kron(&self.matrix, &other.matrix);
        if self.is_dichotomic() && other.is_dichotomic() {
            Self::dichotomic(m)
        } else {
            Self::general(m)
        }
    }
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        Self::new_with_tol(elements, &Tolerances::default())
    }

    pub fn new_with_tol(elements: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty POVM".into()))?;
        let d = first.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for e in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch("POVM elements differ in size".into()));
            }
            let herm = hermiticity_deviation(e);
            if herm > tol.herm {
                return Err(Error::NotHermitian(herm));
            }
            let min = eigvalsh(e)[0];
            if min < -tol.psd {
                return Err(Error::NotPositive(min));
            }
            sum += e;
        }
        let dev = max_abs_diff(&sum, &identity(d));
        if dev > tol.norm {
            return Err(Error::InvalidPovm(dev));
        }
        Ok(Povm { elements })
    }

    pub fn from_observable(obs: &Observable) -> Result<Self> {
        Ok(Povm {
            elements: vec![obs.projector(true)?.clone(), obs.projector(false)?.clone()],
        })
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }
}
