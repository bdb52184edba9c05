use std::path::PathBuf;
use std::process::Command;

fn zero_table() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_1e5.txt")
}

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nyman-lab"))
}

#[test]
fn dn_sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab().args(["dn-sweep", "--n-max", "100", "--out-dir"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("dn_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,dn2,nu,eps,truncated_modes,entry_error"));
    assert_eq!(lines.count(), 100);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["command"]["name"], "dn-sweep");
    assert_eq!(manifest["config"]["command"]["n_max"], 100);
    assert!(manifest["timestamp_unix"].as_u64().is_some());
}

#[test]
fn kappa_error_is_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab().args(["contour", "--n", "1000000", "--out-dir"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(err["error"]["code"], "perron_contour.KappaExceedsK");
    assert!(err["error"]["message"].as_str().unwrap().contains("override"));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = lab().args(["nu", "--n", "3", "--eps", "0.1", "--sigma", "2"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn zero_table_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .env("NYMAN_ZERO_TABLE", zero_table())
        .args(["zeros-import", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("count = 100000"), "{stdout}");
    let missing = lab()
        .env("NYMAN_ZERO_TABLE", dir.path().join("nope.txt"))
        .args(["zeros-import", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn jkl_reports_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["jkl", "--eps", "0.1", "--tau-max", "1000", "--zero-table"])
        .arg(zero_table())
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("jkl.json")).unwrap()).unwrap();
    assert_eq!(v[0]["within_tolerance"], true);
    let csv = std::fs::read_to_string(dir.path().join("jkl.csv")).unwrap();
    assert!(csv.starts_with("eps,K,L_quad,L_closed,J,tail_K\n"));
}
