use super::linalg::*;
use super::state::DensityOperator;
use super::tol::Tolerances;
use crate::error::{Error, Result};

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelKraus {
    kraus: Vec<CMatrix>,
    in_dim: usize,
    out_dim: usize,
}

/// Choi matrix J = sum_{x,y} Phi(|x><y|) (x) |x><y|, output factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    matrix: CMatrix,
    in_dim: usize,
    out_dim: usize,
}

impl ChannelKraus {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::new_with_tol(kraus, &Tolerances::default())
    }

    pub fn new_with_tol(kraus: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (out_dim, in_dim) = first.shape();
        let mut sum = CMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            if k.shape() != (out_dim, in_dim) {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(&sum, &identity(in_dim));
        if dev > tol.norm {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(ChannelKraus {
            kraus,
            in_dim,
            out_dim,
        })
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(d: usize) -> Self {
        ChannelKraus {
            kraus: vec![identity(d)],
            in_dim: d,
            out_dim: d,
        }
    }

    /// rho -> (1-p) rho + p tr(rho) I/d.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing weight {p}")));
        }
        // Unitary error basis of clock and shift matrices.
        let n = (d * d) as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 {
                    (1.0 - p + p / n).sqrt()
                } else {
                    (p / n).sqrt()
                };
                let m = CMatrix::from_fn(d, d, |i, j| {
                    if i == (j + a) % d {
                        C64::from_polar(w, 2.0 * std::f64::consts::PI * (b * j) as f64 / d as f64)
                    } else {
                        ZERO
                    }
                });
                kraus.push(m);
            }
        }
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.in_dim || rho.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} vs operator {}",
                self.in_dim,
                rho.nrows()
            )));
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Apply to a state; the output is a single site of dimension `out_dim`.
    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply(rho.matrix())?, vec![self.out_dim])
    }

    /// self after first.
    pub fn compose(&self, first: &ChannelKraus) -> Result<Self> {
        if first.out_dim != self.in_dim {
            return Err(Error::DimensionMismatch("channels do not compose".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .collect();
        Ok(ChannelKraus {
            kraus,
            in_dim: first.in_dim,
            out_dim: self.out_dim,
        })
    }

    pub fn tensor(&self, other: &ChannelKraus) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| kron(a, b)))
            .collect();
        ChannelKraus {
            kraus,
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
        }
    }

    pub fn choi(&self) -> ChoiMatrix {
        let (din, dout) = (self.in_dim, self.out_dim);
        let mut j = CMatrix::zeros(dout * din, dout * din);
        for k in &self.kraus {
            // |K>> = sum_x K|x> (x) |x>
            let mut v = CVector::zeros(dout * din);
            for x in 0..din {
                for o in 0..dout {
                    v[o * din + x] = k[(o, x)];
                }
            }
            j += outer(&v, &v);
        }
        ChoiMatrix {
            matrix: j,
            in_dim: din,
            out_dim: dout,
        }
    }
}

impl ChoiMatrix {
    pub fn new(matrix: CMatrix, in_dim: usize, out_dim: usize) -> Result<Self> {
        if matrix.shape() != (in_dim * out_dim, in_dim * out_dim) {
            return Err(Error::DimensionMismatch("Choi matrix size".into()));
        }
        Ok(ChoiMatrix {
            matrix,
            in_dim,
            out_dim,
        })
    }

    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        Ok(ChannelKraus::unitary(u.clone())?.choi())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_cp(&self, tol: f64) -> bool {
        hermiticity_deviation(&self.matrix) <= tol && eigvalsh(&self.matrix)[0] >= -tol
    }

    /// Partial trace over the output equals the identity.
    pub fn is_tp(&self, tol: f64) -> bool {
        let red = partial_trace_keep(&self.matrix, &[self.out_dim, self.in_dim], &[1]);
        max_abs_diff(&red, &identity(self.in_dim)) <= tol
    }

    pub fn rank(&self, threshold: f64) -> usize {
        eigvalsh(&self.matrix).iter().filter(|&&v| v > threshold).count()
    }

    /// Phi(rho) = tr_in[J (I (x) rho^T)].
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::DimensionMismatch("Choi input size".into()));
        }
        let (din, dout) = (self.in_dim, self.out_dim);
        Ok(CMatrix::from_fn(dout, dout, |o, p| {
            let mut s = ZERO;
            for x in 0..din {
                for y in 0..din {
                    s += self.matrix[(o * din + x, p * din + y)] * rho[(x, y)];
                }
            }
            s
        }))
    }

    /// Kraus operators from the spectral decomposition of J.
    pub fn to_kraus(&self, threshold: f64) -> Result<ChannelKraus> {
        let (vals, vecs) = eigh(&self.matrix);
        let (din, dout) = (self.in_dim, self.out_dim);
        let kraus: Vec<CMatrix> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(k, &v)| {
                let s = c(v.sqrt(), 0.0);
                CMatrix::from_fn(dout, din, |o, x| vecs[(o * din + x, k)] * s)
            })
            .collect();
        if kraus.is_empty() {
            return Err(Error::Numerical("Choi matrix has no support".into()));
        }
        ChannelKraus::new(kraus)
    }
}
