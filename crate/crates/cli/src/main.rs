//! bbqcert: command-line front end for the black-box certification library.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use report::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "bbqcert", version, about = "Black-box certification of quantum experiments")]
pub struct Cli {
    /// Configuration file (TOML) or a built-in name: reference, mayers-yao,
    /// extended, werner, gisin-peres.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Seed for every randomized step. Overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pass/fail tolerance for the self-tests.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// CHSH value of the configured experiment, or the optimum over measurements.
    Chsh,
    /// Mayers-Yao self-test of the configured experiment.
    Selftest {
        /// Run the extended test with Y-type settings.
        #[arg(long)]
        extended: bool,
    },
    /// Gate test of a reference gate, optionally corrupted by a rotation.
    Gatetest {
        /// hadamard, cz, identity or rot:THETA.
        #[arg(long)]
        gate: String,
        /// Extra rotation applied to the tested gate (overrides noise.rotation).
        #[arg(long, allow_hyphen_values = true)]
        corrupt: Option<f64>,
    },
    /// Device-independent key rate and finite-size tail bound.
    Diqkd(DiqkdArgs),
    /// Fidelity certificates implied by the observed CHSH value.
    Certify,
    /// Sample the quaternionic nonlocal box.
    Qbox {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Tabulate a quantity over a parameter range.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DiqkdArgs {
    /// CHSH value; taken from the configured experiment when absent.
    #[arg(long)]
    pub s: Option<f64>,
    /// Quantum bit error rate.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    /// Key-generation trials.
    #[arg(long)]
    pub n: Option<u64>,
    /// Parameter-estimation trials.
    #[arg(long)]
    pub m: Option<u64>,
    /// Trials outside the product approximation.
    #[arg(long, default_value_t = 0)]
    pub r: u64,
    /// Deviation to bound.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Target failure probability; solves for the deviation.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// key_rate, hye_bound, bound_f_my, bound_f_lo, bound_f_locc, fidelity or tail_bound.
    #[arg(long)]
    pub quantity: String,
    /// Swept parameter; implied by the quantity (s, theta or mu).
    #[arg(long)]
    pub param: Option<String>,
    /// a:b, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub range: String,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long, default_value_t = 1000)]
    pub m: u64,
    #[arg(long, default_value_t = 0)]
    pub r: u64,
    /// Branch winning probability for tail_bound.
    #[arg(long, default_value_t = 0.85)]
    pub p: f64,
}

fn init_threads() {
    if let Some(n) = std::env::var("BBQCERT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_threads();
    match commands::run(&cli) {
        Ok(report) => {
            let written = match &cli.out {
                Some(path) => std::fs::File::create(path).and_then(|f| report.write(std::io::BufWriter::new(f), cli.format)),
                None => report.write(std::io::stdout().lock(), cli.format),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(1);
            }
            if report.pass == Some(false) {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
