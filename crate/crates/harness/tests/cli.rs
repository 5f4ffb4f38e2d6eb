use std::process::Command;

fn lowmem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowmem"))
}

#[test]
fn run_prints_metrics() {
    let out = lowmem()
        .args(["run", "--protocol", "simple-async", "--n", "256", "--p", "0.7"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("success"));
    assert!(text.contains("communications"));
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = lowmem()
        .args(["sweep", "--protocol", "baseline-3state", "--n", "64,128", "--seeds", "2", "--workers", "2", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(dir.path().join("s.json").exists());
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let csv = dir.path().join("c.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"protocol":"sync","n_list":[256],"p_list":[0.75],"epsilon":0.2,"repetitions":1,"output":{{"csv":{:?}}}}}"#,
            csv
        ),
    )
    .unwrap();
    let out = lowmem().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv.exists());
}

#[test]
fn analyze_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let out = lowmem()
        .args(["analyze", "--toy", "copy-then-stop", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["terminal_count"], 2);
}

#[test]
fn rejects_unknown_protocol_and_override() {
    let out = lowmem().args(["run", "--protocol", "gossip"]).output().unwrap();
    assert!(!out.status.success());
    let out = lowmem()
        .args(["run", "--protocol", "sync", "--n", "64", "--override", "speed=2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
