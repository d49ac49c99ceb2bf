use serde_json::Value;
use std::process::{Command, Output};

fn bbqcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbqcert")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = bbqcert(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stderr))
    });
    (v, out.status.code().unwrap())
}

fn result(v: &Value, key: &str) -> f64 {
    v["results"][key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn maximal_violation_gives_unit_rate() {
    let (v, code) = json(&["diqkd", "--s", "2.8284271", "--q", "0"]);
    assert_eq!(code, 0);
    assert!((result(&v, "rate") - 1.0).abs() < 1e-6);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn reference_config_certifies_with_unit_fidelity() {
    let (v, code) = json(&["certify", "--config", "reference"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], Value::Bool(true));
    for k in ["f_my", "f_lo", "f_locc"] {
        assert!((result(&v, k) - 1.0).abs() < 1e-9, "{k}");
    }
}

#[test]
fn key_rate_sweep_is_monotone() {
    let (v, code) = json(&["sweep", "--quantity", "key_rate", "--q", "0.02", "--range", "2:2.8284271", "--steps", "100"]);
    assert_eq!(code, 0);
    let rows = v["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 100);
    let rates: Vec<f64> = rows.iter().map(|r| r[1].as_f64().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(rates[0], 0.0);
    assert!(rates[99] > 0.8);
}

#[test]
fn csv_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let args = ["sweep", "--quantity", "bound_f_locc", "--range", "2:2.8", "--steps", "9"];
    let (v, _) = json(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--format", "csv", "--out", csv_path.to_str().unwrap()]);
    assert!(bbqcert(&with_out).status.success());
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["s", "bound_f_locc"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    let expected: Vec<Vec<f64>> = v["table"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect();
    assert_eq!(rows, expected);
}

#[test]
fn same_seed_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("theta.toml");
    std::fs::write(&cfg, "[state]\nfamily = \"theta\"\ntheta = 0.5\n[noise]\ndepolarizing = 0.1\n").unwrap();
    let args = ["chsh", "--config", cfg.to_str().unwrap(), "--seed", "11"];
    let a = bbqcert(&args);
    let b = bbqcert(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (q1, _) = json(&["qbox", "--samples", "500", "--seed", "3"]);
    let (q2, _) = json(&["qbox", "--samples", "500", "--seed", "3"]);
    assert_eq!(q1, q2);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[state]\nfamily = \"theta\"\n").unwrap();
    assert_eq!(bbqcert(&["chsh", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bbqcert(&["chsh", "--config", "/no/such/file.toml"]).status.code(), Some(1));
    assert_eq!(bbqcert(&["gatetest", "--gate", "toffoli"]).status.code(), Some(1));
    assert_eq!(bbqcert(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bbqcert(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_errors_exit_two() {
    assert_eq!(bbqcert(&["diqkd", "--s", "3.5"]).status.code(), Some(2));
}

#[test]
fn failed_verdicts_exit_three() {
    let (v, code) = json(&["gatetest", "--gate", "hadamard", "--corrupt", "0.05"]);
    assert_eq!(code, 3);
    assert_eq!(v["pass"], Value::Bool(false));
    let (_, code) = json(&["gatetest", "--gate", "hadamard"]);
    assert_eq!(code, 0);
    let (_, code) = json(&["diqkd", "--s", "2.1", "--q", "0.1"]);
    assert_eq!(code, 3);
}

#[test]
fn explicit_settings_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("my.toml");
    let text = "[state]\nfamily = \"phi_plus\"\n\
        [[alice]]\npauli = \"X\"\n[[alice]]\npauli = \"Z\"\n[[alice]]\npauli = \"X+Z\"\n\
        [[bob]]\nvector = [1, 0, 0]\n[[bob]]\nbloch = [0, 0]\n[[bob]]\nvector = [1, 0, 1]\n";
    std::fs::write(&cfg, text).unwrap();
    let (v, code) = json(&["selftest", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    std::fs::write(&cfg, format!("{text}[noise]\nrotation = 0.05\n")).unwrap();
    let (_, code) = json(&["selftest", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn tail_bound_from_eps() {
    let (v, code) = json(&["diqkd", "--s", "2.7", "--n", "100000", "--m", "10000", "--r", "10", "--eps", "1e-6"]);
    assert_eq!(code, 0);
    assert!(result(&v, "tail_bound") <= 1e-6 * (1.0 + 1e-6));
}
