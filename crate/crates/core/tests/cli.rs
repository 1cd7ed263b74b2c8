//! The command-line binary and the artifacts it writes.

use std::path::Path;
use std::process::{Command, Output};

fn od3(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_od3"));
    cmd.args(args).env_remove("OD3_OUT");
    if let Some(dir) = env_out {
        cmd.env("OD3_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn version() {
    let out = od3(&["version"], None);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("od3 {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn static_smoke_writes_artifacts_and_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = od3(&["run", "--preset", "static-smoke", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["trajectory.csv", "bounds.csv", "summary.json", "meta.json"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }

    let trajectory = read(&dir.path().join("trajectory.csv"));
    let header = trajectory.lines().next().unwrap();
    assert_eq!(
        header,
        "t,p_0,p_opt_0,q_0_0,q_opt_0_0,q_1_0,q_opt_1_0,sum_q_0,capacity_0,welfare_online,welfare_opt,welfare_gap"
    );
    assert_eq!(trajectory.lines().count(), 51);
    let mut reader = csv::Reader::from_reader(trajectory.as_bytes());
    for record in reader.records() {
        let gap: f64 = record.unwrap()[11].parse().unwrap();
        assert!(gap < 1e-12);
    }

    let bounds = read(&dir.path().join("bounds.csv"));
    assert!(bounds.starts_with("t,bound,user,lhs,rhs,slack,pass,in_regime\n"));

    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("summary.json"))).unwrap();
    assert_eq!(summary["certified"], true);
    assert_eq!(summary["bounds"]["welfare_gap"]["pass_rate"], 1.0);
    assert!(summary["bounds"]["dual_tracking"]["worst_slack"].is_number());
    assert!(summary["bounds"]["dual_tracking"]["argmin_step"].is_number());

    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("meta.json"))).unwrap();
    assert_eq!(meta["config"]["name"], "static-smoke");
    assert_eq!(meta["eta_in_proven_range"], true);
    assert_eq!(meta["realized_gamma"], 0.0);
    assert!((meta["c"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(meta["b"], 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = od3(&["run", "--preset", "drifting", "--seed", "11"], Some(dir.path()));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["trajectory.csv", "bounds.csv", "summary.json"] {
        assert_eq!(read(&a.path().join(name)), read(&b.path().join(name)), "{name} differs");
    }
}

#[test]
fn env_var_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested");
    let out = od3(&["run", "--preset", "static-smoke"], Some(&target));
    assert!(out.status.success());
    assert!(target.join("meta.json").is_file());
}

#[test]
fn sec5_flags_step_size_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = od3(&["run", "--preset", "sec5", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("meta.json"))).unwrap();
    assert_eq!(meta["eta"], 0.1);
    assert_eq!(meta["eta_in_proven_range"], false);
    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("summary.json"))).unwrap();
    assert!(summary["bounds"]["dual_tracking"]["flagged"].as_u64().unwrap() > 0);
    assert!(summary["bounds"]["dual_tracking"]["pass_rate"].is_null());
}

#[test]
fn eta_and_sign_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = od3(&["run", "--preset", "static-smoke", "--eta", "0.3", "--sign", "paper-literal", "--out", d], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("meta.json"))).unwrap();
    assert_eq!(meta["eta"], 0.3);
    assert_eq!(meta["config"]["sign"], "paper-literal");

    let out = od3(&["run", "--preset", "static-smoke", "--eta", "fast", "--out", d], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn config_file_with_relative_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cap.csv"), "time,a,b\n0,10,6\n1,10.5,6\n2,10.2,6.3\n3,10.1,6.1\n").unwrap();
    let config = serde_json::json!({
        "name": "two-suppliers",
        "n_users": 3,
        "n_suppliers": 2,
        "targets": { "base": 3.0, "alpha": 0.05 },
        "capacity": { "kind": "csv", "path": "cap.csv", "columns": ["a", "b"] },
        "eta": "proven-max",
        "p0": "warm",
        "seed": 4
    });
    let path = dir.path().join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    let out = od3(&["run", "--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], None);
    // 0 or 1 depending on the certificates; 2 would be a setup error.
    assert_ne!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let trajectory = read(&out_dir.join("trajectory.csv"));
    assert_eq!(trajectory.lines().count(), 5);
    assert!(trajectory.lines().next().unwrap().contains("capacity_1"));
}

#[test]
fn bad_config_reports_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cap.csv"), "a\n1\n\n").unwrap();
    std::fs::write(dir.path().join("broken.csv"), "a,b\n1,2\n3,\n").unwrap();
    let config = serde_json::json!({
        "n_users": 1, "n_suppliers": 1,
        "targets": { "base": 1.0 },
        "capacity": { "kind": "csv", "path": "broken.csv", "columns": ["b"] }
    });
    let path = dir.path().join("run.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let out = od3(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3") && err.contains("`b`"), "{err}");

    let out = od3(&["run"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_trace_verb() {
    let ok = od3(&["validate-trace", "--preset", "drifting"], None);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cap.csv");
    std::fs::write(&csv, "t,q\n0,1\n1,1.5\n2,2\n").unwrap();
    let pass = od3(&["validate-trace", "--csv", csv.to_str().unwrap(), "--columns", "q", "--gamma", "0.5"], None);
    assert!(pass.status.success());
    let fail = od3(&["validate-trace", "--csv", csv.to_str().unwrap(), "--columns", "q", "--gamma", "0.4"], None);
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("VIOLATED"));
}

#[test]
fn small_suite_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = od3(&["suite", "--seeds", "6", "--horizon", "40", "--out", dir.path().to_str().unwrap()], None);
    let summary: serde_json::Value = serde_json::from_str(&read(&dir.path().join("summary.json"))).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 6);
    assert_eq!(summary["bounds"]["price_volatility"]["pass_rate"], 1.0);
    assert_eq!(out.status.success(), summary["certified"].as_bool().unwrap());
}
