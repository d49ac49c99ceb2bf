//! Subcommand implementations. Each returns a report; the caller maps a
//! failed verdict to exit code 3.

use crate::config::{self, ConfigError};
use crate::report::{digest, Report};
use crate::{Cli, Command, DiqkdArgs, SweepArgs};
use bbqcert_core::chsh::{chsh_value, gisin_peres_s_max, optimize_s, s_max_two_qubit, ChshValue};
use bbqcert_core::diqkd::{f_of_s, hye_bound, key_rate, mu_for_epsilon, tail_bound, KeyRateInput, TailBoundInput};
use bbqcert_core::hdiv::{box_win_table, classical_max_win};
use bbqcert_core::qcore::linalg::*;
use bbqcert_core::qcore::{DensityOperator, Experiment};
use bbqcert_core::selftest::{
    ext_my_check, extended_reference, gate_test, gate_test_experiments, mayers_yao_reference, my_check_experiment,
    DEFAULT_TOL_MY,
};
use bbqcert_core::statecert::{bound_f_lo, bound_f_locc, bound_f_my_qubit, certify_with, f_my_pure, DEFAULT_RESTARTS};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments: exit code 1.
    Usage(String),
    /// A library computation failed: exit code 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<bbqcert_core::Error> for CliError {
    fn from(e: bbqcert_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Usage(msg.into()))
}

const OPT_RESTARTS: usize = 32;

struct Ctx {
    text: Option<String>,
    seed: u64,
    tol: f64,
}

impl Ctx {
    fn experiment(&self) -> Res<Option<(DensityOperator, Option<Experiment>)>> {
        match &self.text {
            Some(t) => Ok(Some(config::build(t)?)),
            None => Ok(None),
        }
    }

    fn rotation(&self) -> Res<Option<f64>> {
        match &self.text {
            Some(t) => Ok(config::parse(t)?.noise.rotation),
            None => Ok(None),
        }
    }
}

pub fn run(cli: &Cli) -> Res<Report> {
    let text = cli.config.as_deref().map(config::load_text).transpose()?;
    let cfg_seed = match &text {
        Some(t) => config::parse(t)?.seed,
        None => None,
    };
    let seed = cli.seed.or(cfg_seed).unwrap_or(0);
    let tol = cli.tol.unwrap_or(DEFAULT_TOL_MY);
    if !(tol > 0.0 && tol.is_finite()) {
        return usage(format!("--tol must be positive, got {tol}"));
    }
    let name = match &cli.command {
        Command::Chsh => "chsh",
        Command::Selftest { .. } => "selftest",
        Command::Gatetest { .. } => "gatetest",
        Command::Diqkd(_) => "diqkd",
        Command::Certify => "certify",
        Command::Qbox { .. } => "qbox",
        Command::Sweep(_) => "sweep",
    };
    let inputs = format!("{:?}|seed={seed}|tol={tol}", cli.command);
    let mut rep = Report::new(name, seed, digest(&[&inputs, text.as_deref().unwrap_or("")]));
    let ctx = Ctx { text, seed, tol };
    match &cli.command {
        Command::Chsh => chsh(&ctx, &mut rep)?,
        Command::Selftest { extended } => selftest(&ctx, *extended, &mut rep)?,
        Command::Gatetest { gate, corrupt } => gatetest(&ctx, gate, *corrupt, &mut rep)?,
        Command::Diqkd(a) => diqkd(&ctx, a, &mut rep)?,
        Command::Certify => certify(&ctx, &mut rep)?,
        Command::Qbox { samples } => qbox(&ctx, *samples, &mut rep)?,
        Command::Sweep(a) => sweep(a, &mut rep)?,
    }
    Ok(rep)
}

/// The configured experiment, or the state with CHSH-optimal measurements.
fn chsh_experiment(ctx: &Ctx) -> Res<(Experiment, bool)> {
    let Some((rho, exp)) = ctx.experiment()? else {
        return usage("this command needs --config");
    };
    if let Some(e) = exp {
        return Ok((e, false));
    }
    let opt = optimize_s(&rho, OPT_RESTARTS, ctx.seed)?;
    Ok((Experiment::new(rho, opt.observables_a, opt.observables_b)?, true))
}

fn chsh(ctx: &Ctx, rep: &mut Report) -> Res<()> {
    let (exp, optimized) = chsh_experiment(ctx)?;
    let ChshValue { s, p } = chsh_value(&exp)?;
    rep.value("s", s).value("win_probability", p).flag("optimized_settings", optimized);
    if exp.state().dims() == [2, 2] {
        rep.value("s_max", s_max_two_qubit(exp.state())?);
    }
    Ok(())
}

fn selftest(ctx: &Ctx, extended: bool, rep: &mut Report) -> Res<()> {
    let reference = if extended { extended_reference() } else { mayers_yao_reference() };
    let exp = match ctx.experiment()? {
        None => reference,
        Some((_, Some(e))) => e,
        Some((rho, None)) => reference.with_state(rho)?,
    };
    let need = if extended { 6 } else { 3 };
    if exp.observables_a().len() < need || exp.observables_b().len() < need {
        return usage(format!("the self-test needs {need} settings per side"));
    }
    if extended {
        let r = ext_my_check(&exp, ctx.tol)?;
        for (k, b) in r.base_reports.iter().enumerate() {
            rep.value(&format!("max_residual_{k}"), b.max_residual());
        }
        rep.value("conj_a", r.conj_params.a).value("conj_c_re", r.conj_params.c.re).value("conj_c_im", r.conj_params.c.im);
        rep.pass = Some(r.pass);
    } else {
        let r = my_check_experiment(&exp, ctx.tol)?;
        for (k, v) in &r.residuals {
            rep.value(k, *v);
        }
        rep.value("max_residual", r.max_residual());
        if let (Some(a), Some(b)) = (r.anticommutator_a, r.anticommutator_b) {
            rep.value("anticommutator_a", a).value("anticommutator_b", b);
        }
        rep.pass = Some(r.pass);
    }
    Ok(())
}

fn rotation(theta: f64) -> CMatrix {
    real_matrix(2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

pub fn parse_gate(spec: &str) -> Res<CMatrix> {
    Ok(match spec {
        "hadamard" | "h" => hadamard(),
        "identity" | "i" => identity(2),
        "cz" => real_matrix(4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.]),
        _ => match spec.strip_prefix("rot:").map(str::parse::<f64>) {
            Some(Ok(t)) if t.is_finite() => rotation(t),
            _ => return usage(format!("unknown gate {spec:?}; use hadamard, cz, identity or rot:THETA")),
        },
    })
}

fn gatetest(ctx: &Ctx, gate: &str, corrupt: Option<f64>, rep: &mut Report) -> Res<()> {
    let t = parse_gate(gate)?;
    let eps = match corrupt {
        Some(e) => e,
        None => ctx.rotation()?.unwrap_or(0.0),
    };
    let n = if t.nrows() == 4 { 2 } else { 1 };
    let tested = &t * kron(&rotation(eps), &identity(t.nrows() / 2));
    let [e1, e2, e3] = gate_test_experiments(&tested, &tested, n)?;
    let r = gate_test(&e1, &e2, &e3, &t, ctx.tol)?;
    for (k, v) in r.sim_residuals.iter().enumerate() {
        rep.value(&format!("sim_residual_{}", k + 1), *v);
    }
    rep.value("corruption", eps)
        .value("choi_distance", r.choi_distance)
        .flag("moments_unique", r.moments_unique);
    rep.pass = Some(r.pass);
    Ok(())
}

fn diqkd(ctx: &Ctx, a: &DiqkdArgs, rep: &mut Report) -> Res<()> {
    let s = match a.s {
        Some(s) => s,
        None => chsh_value(&chsh_experiment(ctx)?.0)?.s,
    };
    let k = key_rate(&KeyRateInput { s, q: a.q })?;
    rep.value("s", s)
        .value("q", a.q)
        .value("f_s", f_of_s(s)?)
        .value("hye_bound", hye_bound(s)?)
        .value("raw_rate", k.raw)
        .value("rate", k.rate);
    if let Some(n) = a.n {
        let Some(m) = a.m else {
            return usage("--n needs --m");
        };
        let p = (s + 4.0) / 8.0;
        let mu = match (a.mu, a.eps) {
            (Some(mu), None) => mu,
            (None, Some(eps)) => mu_for_epsilon(n, m, a.r, p, eps)?,
            _ => return usage("give exactly one of --mu and --eps with --n/--m"),
        };
        let tail = tail_bound(&TailBoundInput { n, m, r: a.r, p, mu })?;
        rep.value("win_probability", p).value("mu", mu).value("tail_bound", tail);
    }
    rep.pass = Some(k.raw > 0.0);
    Ok(())
}

fn certify(ctx: &Ctx, rep: &mut Report) -> Res<()> {
    let (exp, optimized) = chsh_experiment(ctx)?;
    let r = certify_with(&exp, DEFAULT_RESTARTS, ctx.seed)?;
    rep.value("s", r.s)
        .value("bound_f_my", r.bound_my)
        .value("bound_f_lo", r.bound_lo)
        .value("bound_f_locc", r.bound_locc)
        .flag("optimized_settings", optimized);
    for (k, v) in [("s_max", r.s_max), ("f_my", r.f_my), ("f_lo", r.f_lo), ("f_locc", r.f_locc)] {
        if let Some(v) = v {
            rep.value(k, v);
        }
    }
    rep.pass = Some(r.pass);
    Ok(())
}

fn qbox(ctx: &Ctx, samples: usize, rep: &mut Report) -> Res<()> {
    if samples == 0 {
        return usage("--samples must be positive");
    }
    let wins = box_win_table(samples, ctx.seed);
    let mut total = 0;
    for a in 0..2 {
        for b in 0..2 {
            rep.value(&format!("win_rate_{a}{b}"), wins[a][b] as f64 / samples as f64);
            total += wins[a][b];
        }
    }
    let p = total as f64 / (4 * samples) as f64;
    rep.value("win_probability", p)
        .value("s", 8.0 * p - 4.0)
        .value("classical_max_win", classical_max_win());
    rep.pass = Some(p > classical_max_win());
    Ok(())
}

fn parse_range(r: &str) -> Res<(f64, f64)> {
    let parsed = r.split_once(':').map(|(a, b)| (a.trim().parse::<f64>(), b.trim().parse::<f64>()));
    match parsed {
        Some((Ok(a), Ok(b))) if a.is_finite() && b.is_finite() => Ok((a, b)),
        _ => usage(format!("--range must look like a:b, got {r:?}")),
    }
}

fn sweep(a: &SweepArgs, rep: &mut Report) -> Res<()> {
    let param = match a.quantity.as_str() {
        "key_rate" | "hye_bound" | "bound_f_my" | "bound_f_lo" | "bound_f_locc" => "s",
        "fidelity" => "theta",
        "tail_bound" => "mu",
        q => return usage(format!("unknown quantity {q:?}")),
    };
    if let Some(p) = &a.param {
        if p != param {
            return usage(format!("{} is swept over {param}, not {p}", a.quantity));
        }
    }
    let (lo, hi) = parse_range(&a.range)?;
    if a.steps == 0 {
        return usage("--steps must be positive");
    }
    let xs: Vec<f64> = if a.steps == 1 {
        vec![lo]
    } else {
        (0..a.steps).map(|k| lo + (hi - lo) * k as f64 / (a.steps - 1) as f64).collect()
    };
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let row = match a.quantity.as_str() {
            "key_rate" => vec![x, key_rate(&KeyRateInput { s: x, q: a.q })?.rate],
            "hye_bound" => vec![x, hye_bound(x)?],
            "bound_f_my" => vec![x, bound_f_my_qubit(x)?],
            "bound_f_lo" => vec![x, bound_f_lo(x)?],
            "bound_f_locc" => vec![x, bound_f_locc(x)?],
            "fidelity" => {
                let coeffs = [x.cos().abs(), x.sin().abs()];
                let s = gisin_peres_s_max(&coeffs)?;
                vec![x, s, f_my_pure(&coeffs), bound_f_my_qubit(s)?]
            }
            _ => vec![x, tail_bound(&TailBoundInput { n: a.n, m: a.m, r: a.r, p: a.p, mu: x })?],
        };
        rows.push(row);
    }
    let cols: Vec<&str> = match a.quantity.as_str() {
        "fidelity" => vec!["theta", "s", "f_my", "bound_f_my"],
        q => vec![param, q],
    };
    rep.value("steps", xs.len() as f64);
    rep.set_table(&cols, rows);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_parse() {
        assert_eq!(parse_gate("cz").unwrap().nrows(), 4);
        assert!(max_abs_diff(&parse_gate("rot:0").unwrap(), &identity(2)) < 1e-15);
        assert!(parse_gate("rot:x").is_err());
        assert!(parse_gate("toffoli").is_err());
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("-1:2.5").unwrap(), (-1.0, 2.5));
        assert!(parse_range("1-2").is_err());
    }
}
