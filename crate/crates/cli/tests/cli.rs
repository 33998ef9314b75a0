use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn delaystab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaystab"))
        .args(args)
        .env_remove("DELAYSTAB_TOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn verdict<'a>(report: &'a Value, criterion: &str) -> &'a Value {
    report["verdicts"].as_array().unwrap().iter().find(|v| v["criterion"] == criterion).unwrap()
}

#[test]
fn two_neuron_ref_is_certified() {
    let path = fixture("two_neuron.json");
    let out = delaystab(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["selected"]["criterion"], "theorem1");
    assert_eq!(report["selected"]["status"], "stable_certified");
    assert_eq!(verdict(&report, "gopalsamy17")["status"], "inconclusive");
    assert_eq!(verdict(&report, "criterion18")["status"], "stable_certified");
    assert!(report["decay_certificate"]["lambda0"].as_f64().unwrap() > 0.0);
    assert_eq!(report["input_sha256"].as_str().unwrap().len(), 64);
    assert!(stderr(&out).contains("stable_certified by theorem1"));
}

#[test]
fn requested_criterion_sets_exit_status() {
    let path = fixture("two_neuron.json");
    let out = delaystab(&["analyze", path.to_str().unwrap(), "--criterion", "gopalsamy17"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["selected"]["requested"], true);

    let out = delaystab(&["analyze", path.to_str().unwrap(), "--criterion", "cor99"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown criterion"));
}

#[test]
fn invalid_parameter_is_an_input_error() {
    let path = fixture("zero_decay.json");
    let out = delaystab(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = stderr(&out);
    assert!(err.contains("line 4") && err.contains("a1"), "{err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = delaystab(&["analyze", "/nonexistent/system.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strong_coupling_is_inconclusive() {
    let path = fixture("strong_coupling.json");
    let out = delaystab(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["selected"]["status"], "inconclusive");
    assert!(report.get("decay_certificate").is_none());
}

#[test]
fn certify_rate_reports_lambda0() {
    let path = fixture("two_neuron.json");
    let out = delaystab(&["certify-rate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let lambda0 = json(&out)["certificate"]["lambda0"].as_f64().unwrap();
    assert!(lambda0 > 0.0 && lambda0 < 0.5, "{lambda0}");

    let path = fixture("strong_coupling.json");
    let out = delaystab(&["certify-rate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].is_string());
}

#[test]
fn leaky_bam_equilibrium() {
    let path = fixture("leaky_bam.json");
    let out = delaystab(&["equilibrium", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let eq = &json(&out)["equilibrium"];
    assert_eq!(eq["existence"]["exists_unique"], true);
    // x = y/720 + 10000, y = x/200 + 20000
    let det = 1.0 - 1.0 / 144000.0;
    let x = (10000.0 + 20000.0 / 720.0) / det;
    let y = (20000.0 + 10000.0 / 200.0) / det;
    let xs = eq["solution"]["x_star"][0].as_f64().unwrap();
    let ys = eq["solution"]["y_star"][0].as_f64().unwrap();
    assert!(((xs - x) / x).abs() < 1e-9 && ((ys - y) / y).abs() < 1e-9, "{xs} {ys}");

    let out = delaystab(&["equilibrium", fixture("two_neuron.json").to_str().unwrap(), "--max-iter", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mu_sweep_stays_stable_and_bisects() {
    let path = fixture("leaky_bam.json");
    let out = delaystab(&[
        "sweep",
        path.to_str().unwrap(),
        "--param",
        "parameters.mu",
        "--values",
        "0:18:2",
        "--bisect",
        "18,19.99",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    let rows = doc["rows"].as_array().unwrap();
    let values: Vec<f64> = rows.iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert_eq!(values, (0..10).map(|k| 2.0 * k as f64).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r["status"] == "stable_certified"));
    let first = doc["boundary"]["first_unstable"].as_f64().unwrap();
    let last = doc["boundary"]["last_stable"].as_f64().unwrap();
    assert!(18.0 < last && last < first && first < 19.99);

    let out = delaystab(&["sweep", path.to_str().unwrap(), "--param", "parameters.nu", "--values", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_with_failing_rows_is_inconclusive() {
    let path = fixture("leaky_bam.json");
    let out = delaystab(&["sweep", path.to_str().unwrap(), "--param", "parameters.mu", "--values", "10,25"]);
    assert_eq!(out.status.code(), Some(2));
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows[0]["status"], "stable_certified");
    assert!(rows[1]["error"].is_string());
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let path = fixture("two_neuron.json");
    let out = delaystab(&["simulate", path.to_str().unwrap(), "--t-end", "2", "--step", "0.01", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x_1,x_2");
    assert_eq!(lines.len(), 202);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 1.0]);
    let last: Vec<f64> = lines[201].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 2.0).abs() < 1e-12);

    let again = dir.path().join("again.csv");
    delaystab(&["simulate", path.to_str().unwrap(), "--t-end", "2", "--step", "0.01", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn simulate_rejects_large_steps() {
    let path = fixture("two_neuron.json");
    let out = delaystab(&["simulate", path.to_str().unwrap(), "--t-end", "1", "--step", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("one tenth"), "{}", stderr(&out));
}

#[test]
fn analyze_with_simulation_fits_decay() {
    let path = fixture("leaky_bam.json");
    let out = delaystab(&["analyze", path.to_str().unwrap(), "--simulate"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let lambda0 = report["decay_certificate"]["lambda0"].as_f64().unwrap();
    let lambda_hat = report["simulation"]["decay_fit"]["lambda_hat"].as_f64().unwrap();
    assert!(lambda_hat >= lambda0, "{lambda_hat} < {lambda0}");
}

#[test]
fn tolerance_from_environment() {
    let path = fixture("two_neuron.json");
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_delaystab"))
            .args(["analyze", path.to_str().unwrap()])
            .env("DELAYSTAB_TOL", tol)
            .output()
            .unwrap()
    };
    let out = run("1e-9");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["tolerance"].as_f64(), Some(1e-9));
    assert_eq!(run("not-a-number").status.code(), Some(1));
    assert_eq!(run("-1").status.code(), Some(1));

    let out = Command::new(env!("CARGO_BIN_EXE_delaystab"))
        .args(["analyze", path.to_str().unwrap(), "--tol", "1e-6"])
        .env("DELAYSTAB_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(json(&out)["tolerance"].as_f64(), Some(1e-6));
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_delaystab"))
        .args(["certify-rate", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let text = std::fs::read(fixture("two_neuron.json")).unwrap();
    child.stdin.take().unwrap().write_all(&text).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
