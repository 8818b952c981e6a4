use std::process::Command;

fn entangle() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entangle"))
}

#[test]
fn asymptotic_run_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("amps.csv");
    let status = entangle()
        .args(["asymptotic", "--t-steps", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# asymptotic_entropy = 5.00402423538e-1"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("amps.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["scalars"]["abs_T_sq"], 0.8000000000000002);
}

#[test]
fn mass_ratio_flags_and_json_format() {
    let output = entangle()
        .args(["asymptotic", "--m2", "10", "--v0", "-5", "--format", "json", "--t-steps", "3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let table: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 3);
    let footer = table["footer"].to_string();
    assert!(footer.contains("asymptotic_entropy = 6.88625"), "{footer}");
    let manifest: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(manifest["config"]["params"]["m2"], 10.0);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "m1 = 1\nwidth = 3\n").unwrap();
    let output = entangle().args(["trace", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown configuration key `width`"));

    for args in [
        vec!["trace", "--grid-n", "1"],
        vec!["trace", "--format", "xml"],
        vec!["sweep", "--axis", "sigma"],
        vec!["trace", "--bogus"],
        vec!["trace", "--m1", "-1"],
    ] {
        let code = entangle().args(&args).output().unwrap().status.code();
        assert_eq!(code, Some(1), "{args:?}");
    }
    let code = entangle()
        .arg("asymptotic")
        .env("ENTANGLE_THREADS", "zero")
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(1));
}

#[test]
fn injected_coarse_quadrature_fails_validation() {
    let output = entangle()
        .args(["validate", "--grid-n", "256", "--dy-scale", "50"])
        .env("ENTANGLE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let csv = String::from_utf8_lossy(&output.stdout);
    assert!(csv.lines().any(|l| l.starts_with("relative_norm_t1tc,") && l.ends_with(",fail")));
}

#[test]
fn help_exits_cleanly() {
    let output = entangle().arg("--help").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8_lossy(&output.stdout);
    for sub in ["trace", "modes", "asymptotic", "sweep", "validate"] {
        assert!(text.contains(sub));
    }
}
