use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heatft"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn validate_example_config() {
    let out = bin().args(["validate", "--config"]).arg(config("qubits_correlated.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["command"], "validate");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "dims = [2, 2]\nh_a = 3\n").unwrap();
    let out = bin().args(["verify", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["verify", "--config"]).arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["verify", "--seed", "1", "--tol", "nonsense=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn marginal_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("qubits_uncorrelated.toml")).unwrap();
    let broken = text.replacen("chi = [[[0.0, 0.0]", "chi = [[[0.01, 0.0]", 1);
    let path = dir.path().join("marginal.toml");
    std::fs::write(&path, broken).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chi_"));
}

#[test]
fn verify_random_and_example() {
    let out = bin().args(["verify", "--seed", "5", "--sweep", "0:2:3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = bin()
        .args(["verify", "--time", "0.37", "--config"])
        .arg(config("qubits_correlated.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn heat_and_example_write_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("heat.csv");
    let out = bin()
        .args(["heat", "--sweep", "0:2:11", "--out"])
        .arg(&csv)
        .arg("--config")
        .arg(config("qubits_correlated.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,Q,P_f,P_r,ratio,exp_Q_dbeta,psi"));
    assert_eq!(text.lines().count(), 1 + 11 * 3);
    assert!(dir.path().join("heat.csv.report.json").exists());

    let csv = dir.path().join("example.csv");
    let out = bin().args(["example", "--correlated", "false", "--out"]).arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 101 * 3);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("example.csv.report.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["name"] == "forward_equals_reverse"));
}
