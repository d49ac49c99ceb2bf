use super::linalg::*;
use super::observable::Observable;
use super::state::{trace_product, DensityOperator};
use super::tol::Tolerances;
use crate::error::{Error, Result};

/// Bipartite experiment with dichotomic measurement settings on each side.
#[derive(Clone, Debug)]
pub struct Experiment {
    state: DensityOperator,
    obs_a: Vec<Observable>,
    obs_b: Vec<Observable>,
}

/// Experiment with any number of parties, one site each.
#[derive(Clone, Debug)]
pub struct MultipartyExperiment {
    state: DensityOperator,
    settings: Vec<Vec<Observable>>,
}

/// Outcome probabilities P(x, y | a, b) with x, y in {+1, -1}.
///
/// Outcomes are indexed 0: (+,+), 1: (+,-), 2: (-,+), 3: (-,-).
#[derive(Clone, Debug, PartialEq)]
pub struct Statistics {
    na: usize,
    nb: usize,
    table: Vec<[f64; 4]>,
}

/// tr_0[(P (x) I_rest) sigma] for sigma on (d0, rest).
fn contract_first(sigma: &CMatrix, p: &CMatrix, rest: usize) -> CMatrix {
    let d0 = p.nrows();
    let mut out = CMatrix::zeros(rest, rest);
    for i in 0..d0 {
        for j in 0..d0 {
            let w = p[(j, i)];
            if w != ZERO {
                out += sigma.view((i * rest, j * rest), (rest, rest)) * w;
            }
        }
    }
    out
}

pub fn outcome_index(x_plus: bool, y_plus: bool) -> usize {
    (!x_plus as usize) * 2 + (!y_plus as usize)
}

fn check_settings(obs: &[Observable], d: usize, side: &str) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::InvalidArgument(format!("no settings for party {side}")));
    }
    for o in obs {
        if o.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "party {side} observable has dimension {}, site has {d}",
                o.dim()
            )));
        }
        if !o.is_dichotomic() {
            return Err(Error::Unsupported("non-dichotomic measurement setting".into()));
        }
    }
    Ok(())
}

impl Experiment {
    pub fn new(state: DensityOperator, obs_a: Vec<Observable>, obs_b: Vec<Observable>) -> Result<Self> {
        if state.dims().len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "bipartite experiment needs two sites, got {}",
                state.dims().len()
            )));
        }
        check_settings(&obs_a, state.dims()[0], "A")?;
        check_settings(&obs_b, state.dims()[1], "B")?;
        Ok(Experiment { state, obs_a, obs_b })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn observables_a(&self) -> &[Observable] {
        &self.obs_a
    }

    pub fn observables_b(&self) -> &[Observable] {
        &self.obs_b
    }

    pub fn with_state(&self, state: DensityOperator) -> Result<Self> {
        Self::new(state, self.obs_a.clone(), self.obs_b.clone())
    }

    pub fn to_multiparty(&self) -> MultipartyExperiment {
        MultipartyExperiment {
            state: self.state.clone(),
            settings: vec![self.obs_a.clone(), self.obs_b.clone()],
        }
    }

    /// <A_a (x) B_b>.
    pub fn correlator(&self, a: usize, b: usize) -> Result<f64> {
        let oa = self.obs_a.get(a).ok_or(Error::InvalidArgument(format!("setting {a}")))?;
        let ob = self.obs_b.get(b).ok_or(Error::InvalidArgument(format!("setting {b}")))?;
        self.state.expectation(&kron(oa.matrix(), ob.matrix()))
    }
}

impl MultipartyExperiment {
    pub fn new(state: DensityOperator, settings: Vec<Vec<Observable>>) -> Result<Self> {
        if state.dims().len() != settings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} sites but {} parties",
                state.dims().len(),
                settings.len()
            )));
        }
        for (k, obs) in settings.iter().enumerate() {
            check_settings(obs, state.dims()[k], &k.to_string())?;
        }
        Ok(MultipartyExperiment { state, settings })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn settings(&self) -> &[Vec<Observable>] {
        &self.settings
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    /// All setting tuples in lexicographic order, party 0 slowest.
    pub fn setting_tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for obs in &self.settings {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..obs.len()).map(move |s| {
                        let mut t = t.clone();
                        t.push(s);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Joint outcome distribution for one setting tuple. Entry `k` has bit
    /// `parties-1-m` of `k` set when party `m` obtains -1.
    pub fn distribution(&self, choice: &[usize]) -> Result<Vec<f64>> {
        if choice.len() != self.parties() {
            return Err(Error::InvalidArgument("setting tuple length".into()));
        }
        let n = self.parties();
        let mut projs: Vec<[&CMatrix; 2]> = Vec::with_capacity(n);
        for (m, &s) in choice.iter().enumerate() {
            let o = self.settings[m]
                .get(s)
                .ok_or_else(|| Error::InvalidArgument(format!("party {m} has no setting {s}")))?;
            projs.push([o.projector(true)?, o.projector(false)?]);
        }
        // Contract one party at a time: sigma -> tr_0[(P (x) I) sigma].
        let dims = self.state.dims();
        let mut layer = vec![self.state.matrix().clone()];
        for m in 0..n {
            let rest: usize = dims[m + 1..].iter().product();
            layer = layer
                .iter()
                .flat_map(|sigma| projs[m].iter().map(move |p| contract_first(sigma, p, rest)))
                .collect();
        }
        Ok(layer.iter().map(|x| x[(0, 0)].re).collect())
    }

    pub fn all_distributions(&self) -> Result<Vec<Vec<f64>>> {
        self.setting_tuples()
            .iter()
            .map(|t| self.distribution(t))
            .collect()
    }
}

impl Statistics {
    pub fn new(na: usize, nb: usize, table: Vec<[f64; 4]>) -> Result<Self> {
        Self::new_with_tol(na, nb, table, &Tolerances::default())
    }

    pub fn new_with_tol(na: usize, nb: usize, table: Vec<[f64; 4]>, tol: &Tolerances) -> Result<Self> {
        if table.len() != na * nb || na == 0 || nb == 0 {
            return Err(Error::DimensionMismatch(format!(
                "table has {} rows for {na}x{nb} settings",
                table.len()
            )));
        }
        let s = Statistics { na, nb, table };
        s.validate(tol)?;
        Ok(s)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        for row in &self.table {
            if row.iter().any(|p| !p.is_finite() || *p < -tol.norm || *p > 1.0 + tol.norm) {
                return Err(Error::InvalidStatistics("probability range".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol.norm {
                return Err(Error::InvalidStatistics(format!("normalization ({sum})")));
            }
        }
        for a in 0..self.na {
            for b in 1..self.nb {
                if (self.marginal_a_given(a, b) - self.marginal_a_given(a, 0)).abs() > tol.ns {
                    return Err(Error::InvalidStatistics("no-signalling from B to A".into()));
                }
            }
        }
        for b in 0..self.nb {
            for a in 1..self.na {
                if (self.marginal_b_given(b, a) - self.marginal_b_given(b, 0)).abs() > tol.ns {
                    return Err(Error::InvalidStatistics("no-signalling from A to B".into()));
                }
            }
        }
        Ok(())
    }

    pub fn settings_a(&self) -> usize {
        self.na
    }

    pub fn settings_b(&self) -> usize {
        self.nb
    }

    pub fn row(&self, a: usize, b: usize) -> &[f64; 4] {
        &self.table[a * self.nb + b]
    }

    pub fn table(&self) -> &[[f64; 4]] {
        &self.table
    }

    pub fn prob(&self, a: usize, b: usize, x_plus: bool, y_plus: bool) -> f64 {
        self.row(a, b)[outcome_index(x_plus, y_plus)]
    }

    /// P(same) - P(different) = <A_a B_b>.
    pub fn correlator(&self, a: usize, b: usize) -> f64 {
        let r = self.row(a, b);
        r[0] - r[1] - r[2] + r[3]
    }

    fn marginal_a_given(&self, a: usize, b: usize) -> f64 {
        let r = self.row(a, b);
        r[0] + r[1] - r[2] - r[3]
    }

    fn marginal_b_given(&self, b: usize, a: usize) -> f64 {
        let r = self.row(a, b);
        r[0] - r[1] + r[2] - r[3]
    }

    /// <A_a>, read from the first setting of B.
    pub fn marginal_a(&self, a: usize) -> f64 {
        self.marginal_a_given(a, 0)
    }

    pub fn marginal_b(&self, b: usize) -> f64 {
        self.marginal_b_given(b, 0)
    }

    /// Largest absolute difference between two tables of equal shape.
    pub fn max_deviation(&self, other: &Statistics) -> Result<f64> {
        if self.na != other.na || self.nb != other.nb {
            return Err(Error::DimensionMismatch("statistics shapes differ".into()));
        }
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .flat_map(|(r, s)| r.iter().zip(s).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max))
    }

    /// Restrict to a subset of settings on each side.
    pub fn select(&self, a_idx: &[usize], b_idx: &[usize]) -> Result<Statistics> {
        if a_idx.iter().any(|&a| a >= self.na) || b_idx.iter().any(|&b| b >= self.nb) {
            return Err(Error::InvalidArgument("setting index out of range".into()));
        }
        let table = a_idx
            .iter()
            .flat_map(|&a| b_idx.iter().map(move |&b| (a, b)))
            .map(|(a, b)| *self.row(a, b))
            .collect();
        Ok(Statistics {
            na: a_idx.len(),
            nb: b_idx.len(),
            table,
        })
    }
}

/// P(x, y | a, b) = tr(rho Pi_x^{A_a} (x) Pi_y^{B_b}).
pub fn statistics_of(exp: &Experiment) -> Result<Statistics> {
    statistics_of_with_tol(exp, &Tolerances::default())
}

pub fn statistics_of_with_tol(exp: &Experiment, tol: &Tolerances) -> Result<Statistics> {
    let rho = exp.state.matrix();
    let mut table = Vec::with_capacity(exp.obs_a.len() * exp.obs_b.len());
    for oa in &exp.obs_a {
        let pa = [oa.projector(true)?, oa.projector(false)?];
        for ob in &exp.obs_b {
            let pb = [ob.projector(true)?, ob.projector(false)?];
            let mut row = [0.0; 4];
            for (k, r) in row.iter_mut().enumerate() {
                *r = trace_product(rho, &kron(pa[k / 2], pb[k % 2])).re;
            }
            table.push(row);
        }
    }
    Statistics::new_with_tol(exp.obs_a.len(), exp.obs_b.len(), table, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::PureState;

    #[test]
    fn phi_plus_zz_statistics() {
        let exp = Experiment::new(
            PureState::phi_plus().density(),
            vec![Observable::z()],
            vec![Observable::z()],
        )
        .unwrap();
        let s = statistics_of(&exp).unwrap();
        assert!((s.prob(0, 0, true, true) - 0.5).abs() < 1e-12);
        assert!((s.prob(0, 0, false, false) - 0.5).abs() < 1e-12);
        assert!(s.prob(0, 0, true, false).abs() < 1e-12);
        assert!((s.correlator(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_observable() {
        let exp = Experiment::new(
            PureState::phi_plus().density(),
            vec![Observable::identity(3)],
            vec![Observable::z()],
        );
        assert!(matches!(exp, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn signalling_table_is_rejected() {
        let table = vec![[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
        assert!(matches!(Statistics::new(1, 2, table), Err(Error::InvalidStatistics(_))));
    }

    #[test]
    fn multiparty_distribution_sums_to_one() {
        let ghz = PureState::normalized(
            CVector::from_fn(8, |i, _| if i == 0 || i == 7 { ONE } else { ZERO }),
            vec![2, 2, 2],
        )
        .unwrap();
        let exp = MultipartyExperiment::new(
            ghz.density(),
            vec![vec![Observable::z()], vec![Observable::z()], vec![Observable::z()]],
        )
        .unwrap();
        let d = exp.distribution(&[0, 0, 0]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[7] - 0.5).abs() < 1e-12);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
