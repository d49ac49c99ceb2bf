//! Experiment configuration files (TOML) and the built-in configurations.

use bbqcert_core::chsh::{gisin_peres_experiment, reference_experiment, BellSpectrum};
use bbqcert_core::qcore::linalg::*;
use bbqcert_core::qcore::{DensityOperator, Experiment, Observable, PureState};
use bbqcert_core::selftest::{extended_reference, mayers_yao_reference};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub state: Option<StateSpec>,
    pub alice: Option<Vec<ObservableSpec>>,
    pub bob: Option<Vec<ObservableSpec>>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// phi_plus, schmidt, theta, bell_diagonal, werner, product or explicit.
    pub family: String,
    pub theta: Option<f64>,
    pub coefficients: Option<Vec<f64>>,
    /// (phi+, psi-, phi-, psi+).
    pub weights: Option<[f64; 4]>,
    pub visibility: Option<f64>,
    pub dims: Option<[usize; 2]>,
    /// Row-major [re, im] pairs.
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    /// Signed sum of Pauli letters, normalized, e.g. "X+Z" or "-Y".
    pub pauli: Option<String>,
    pub vector: Option<[f64; 3]>,
    /// (theta, phi) on the Bloch sphere.
    pub bloch: Option<[f64; 2]>,
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// rho -> (1 - p) rho + p I/d.
    pub depolarizing: Option<f64>,
    /// Rotation of every qubit observable of Alice by this angle about Y.
    pub rotation: Option<f64>,
}

/// A configuration error with the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub const BUILTINS: [&str; 5] = ["reference", "mayers-yao", "extended", "werner", "gisin-peres"];

/// Text of a configuration: a built-in name or a file path.
pub fn load_text(arg: &str) -> Result<String, ConfigError> {
    if BUILTINS.contains(&arg) {
        return Ok(format!("builtin:{arg}"));
    }
    std::fs::read_to_string(arg).map_err(|e| ConfigError(format!("cannot read config {arg}: {e}")))
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    if text.starts_with("builtin:") {
        return Ok(ExperimentConfig::default());
    }
    toml::from_str(text).map_err(|e| ConfigError(format!("malformed config: {e}")))
}

/// The experiment a configuration describes. `None` when no measurements
/// are given, so that commands can pick their own.
pub fn build(text: &str) -> Result<(DensityOperator, Option<Experiment>), ConfigError> {
    if let Some(name) = text.strip_prefix("builtin:") {
        let exp = builtin(name)?;
        return Ok((exp.state().clone(), Some(exp)));
    }
    let cfg = parse(text)?;
    let mut rho = match &cfg.state {
        Some(s) => build_state(s)?,
        None => return err("missing [state] section"),
    };
    if let Some(p) = cfg.noise.depolarizing {
        if !(0.0..=1.0).contains(&p) {
            return err(format!("noise.depolarizing = {p} outside [0, 1]"));
        }
        let mixed = DensityOperator::maximally_mixed(rho.dims().to_vec()).map_err(core_err)?;
        rho = DensityOperator::mixture(&[(1.0 - p, &rho), (p, &mixed)]).map_err(core_err)?;
    }
    let exp = match (&cfg.alice, &cfg.bob) {
        (None, None) => None,
        (Some(a), Some(b)) => {
            let mut oa = a.iter().enumerate().map(|(k, s)| build_observable(s, &format!("alice[{k}]"))).collect::<Result<Vec<_>, _>>()?;
            let ob = b.iter().enumerate().map(|(k, s)| build_observable(s, &format!("bob[{k}]"))).collect::<Result<Vec<_>, _>>()?;
            if let Some(eps) = cfg.noise.rotation {
                oa = oa.iter().map(|o| rotate(o, eps)).collect::<Result<_, _>>()?;
            }
            Some(Experiment::new(rho.clone(), oa, ob).map_err(|e| ConfigError(format!("invalid experiment: {e}")))?)
        }
        _ => return err("alice and bob settings must be given together"),
    };
    Ok((rho, exp))
}

fn core_err(e: bbqcert_core::Error) -> ConfigError {
    ConfigError(e.to_string())
}

fn builtin(name: &str) -> Result<Experiment, ConfigError> {
    Ok(match name {
        "reference" => reference_experiment(),
        "mayers-yao" => mayers_yao_reference(),
        "extended" => extended_reference(),
        "werner" => {
            let phi = PureState::phi_plus().density();
            let mixed = DensityOperator::maximally_mixed(vec![2, 2]).map_err(core_err)?;
            let rho = DensityOperator::mixture(&[(0.9, &phi), (0.1, &mixed)]).map_err(core_err)?;
            reference_experiment().with_state(rho).map_err(core_err)?
        }
        "gisin-peres" => {
            let t = std::f64::consts::PI / 6.0;
            gisin_peres_experiment(&PureState::from_schmidt(&[t.cos(), t.sin()]).map_err(core_err)?).map_err(core_err)?
        }
        _ => return err(format!("unknown built-in config {name}")),
    })
}

fn matrix_from(rows: &[Vec<[f64; 2]>], field: &str) -> Result<CMatrix, ConfigError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return err(format!("{field}: matrix must be square and non-empty"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn need<T: Copy>(v: Option<T>, field: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("state.{field} is required for this family")))
}

fn build_state(s: &StateSpec) -> Result<DensityOperator, ConfigError> {
    let wrap = |r: bbqcert_core::Result<DensityOperator>| r.map_err(|e| ConfigError(format!("state: {e}")));
    match s.family.as_str() {
        "phi_plus" => Ok(PureState::phi_plus().density()),
        "theta" => {
            let t = need(s.theta, "theta")?;
            wrap(PureState::from_schmidt(&[t.cos(), t.sin()]).map(|p| p.density()))
        }
        "schmidt" => {
            let c = s.coefficients.as_ref().ok_or_else(|| ConfigError("state.coefficients is required".into()))?;
            wrap(PureState::from_schmidt(c).map(|p| p.density()))
        }
        "bell_diagonal" => wrap(BellSpectrum::new(need(s.weights, "weights")?).map(|b| b.state())),
        "werner" => {
            let v = need(s.visibility, "visibility")?;
            if !(0.0..=1.0).contains(&v) {
                return err(format!("state.visibility = {v} outside [0, 1]"));
            }
            let phi = PureState::phi_plus().density();
            let mixed = DensityOperator::maximally_mixed(vec![2, 2]).map_err(core_err)?;
            wrap(DensityOperator::mixture(&[(v, &phi), (1.0 - v, &mixed)]))
        }
        "product" => wrap(PureState::basis(vec![2, 2], 0).map(|p| p.density())),
        "explicit" => {
            let dims = need(s.dims, "dims")?;
            let m = matrix_from(s.matrix.as_deref().unwrap_or_default(), "state.matrix")?;
            wrap(DensityOperator::new(m, dims.to_vec()))
        }
        other => err(format!("state.family: unknown family {other}")),
    }
}

fn pauli_sum(expr: &str, field: &str) -> Result<[f64; 3], ConfigError> {
    let mut v = [0.0; 3];
    let mut sign = 1.0;
    let mut terms = 0;
    for ch in expr.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '+' => sign = 1.0,
            '-' => sign = -1.0,
            'X' | 'x' | 'Y' | 'y' | 'Z' | 'z' => {
                let k = match ch.to_ascii_uppercase() {
                    'X' => 0,
                    'Y' => 1,
                    _ => 2,
                };
                v[k] += sign;
                sign = 1.0;
                terms += 1;
            }
            _ => return err(format!("{field}.pauli: unexpected character {ch:?} in {expr:?}")),
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if terms == 0 || n == 0.0 {
        return err(format!("{field}.pauli: {expr:?} is not a valid Pauli combination"));
    }
    Ok(v.map(|x| x / n))
}

fn build_observable(s: &ObservableSpec, field: &str) -> Result<Observable, ConfigError> {
    let given = [s.pauli.is_some(), s.vector.is_some(), s.bloch.is_some(), s.matrix.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return err(format!("{field}: give exactly one of pauli, vector, bloch, matrix"));
    }
    let wrap = |r: bbqcert_core::Result<Observable>| r.map_err(|e| ConfigError(format!("{field}: {e}")));
    if let Some(p) = &s.pauli {
        return wrap(Observable::from_vector(pauli_sum(p, field)?));
    }
    if let Some(v) = s.vector {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return err(format!("{field}.vector must be non-zero"));
        }
        return wrap(Observable::from_vector(v.map(|x| x / n)));
    }
    if let Some([t, p]) = s.bloch {
        return Ok(Observable::bloch(t, p));
    }
    let m = matrix_from(s.matrix.as_deref().unwrap_or_default(), &format!("{field}.matrix"))?;
    wrap(Observable::dichotomic(m))
}

fn rotate(o: &Observable, eps: f64) -> Result<Observable, ConfigError> {
    if o.dim() != 2 {
        return err("noise.rotation applies to qubit observables only");
    }
    let (c_, s) = ((eps / 2.0).cos(), (eps / 2.0).sin());
    let u = real_matrix(2, &[c_, -s, s, c_]);
    o.conjugate_by(&u).map_err(core_err)
}
