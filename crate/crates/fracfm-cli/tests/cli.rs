use std::path::Path;
use std::process::{Command, Output};

fn fracfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracfm")).args(args).env_remove("FRACFM_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Reduced penny scene written through `preset-dump`.
fn small_config(dir: &Path) -> String {
    let o = fracfm(&["preset-dump", "penny-homogeneous", "--seed", "4", "--out", dir.join("run").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o)
        .replace("refinement = 3", "refinement = 1")
        .replace("n_theta = 20", "n_theta = 4")
        .replace("n_phi = 10", "n_phi = 6")
        .replace("count = 441", "count = 25");
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn preset_dump_lists_and_expands() {
    let o = fracfm(&["preset-dump"]);
    assert!(o.status.success());
    for name in ["composite1", "composite2", "penny-homogeneous", "inclusion-validation"] {
        assert!(stdout(&o).contains(name));
    }
    let o = fracfm(&["preset-dump", "composite1"]);
    assert!(stdout(&o).contains("best_effort = true"));
    let o = fracfm(&["preset-dump", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("penny-homogeneous"));
}

#[test]
fn run_then_staged_invert_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let o = fracfm(&["run", "--config", &cfg, "--threads", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("localization ratio"));
    let full = tmp.path().join("run");

    let fwd = tmp.path().join("fwd");
    let o = fracfm(&["forward", "--config", &cfg, "--out", fwd.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fwd.join("F.ffm").is_file() && !fwd.join("indicator.csv").exists());
    let inv = tmp.path().join("inv");
    let o = fracfm(&["invert", "--config", &cfg, "--archive", fwd.to_str().unwrap(), "--out", inv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["indicator.csv", "eigenvalues.csv", "F_noisy.ffm"] {
        assert_eq!(std::fs::read(full.join(name)).unwrap(), std::fs::read(inv.join(name)).unwrap(), "{name}");
    }

    // flags override the file
    let other = tmp.path().join("other");
    let o = fracfm(&["run", "--config", &cfg, "--seed", "9", "--noise", "2", "--method", "picard", "--tau", "0.3", "--out", other.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(other.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["method"], "picard");
    assert_eq!(manifest["tau"], 0.3);
    assert!((manifest["noise"]["delta"].as_f64().unwrap() - 0.02).abs() < 1e-9);
}

#[test]
fn bad_inputs_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let typo = tmp.path().join("typo.toml");
    std::fs::write(&typo, std::fs::read_to_string(&cfg).unwrap().replace("seed = 4", "seed = 4\nsede = 5")).unwrap();
    let o = fracfm(&["run", "--config", typo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sede"));
    let o = fracfm(&["invert", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let o = fracfm(&["invert", "--config", &cfg, "--archive", tmp.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("F.ffm"));
    let o = fracfm(&["run", "--config", &cfg, "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fracfm(&["validate", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_reports_and_writes_json() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fracfm"))
        .args(["validate", "morozov", "--out", tmp.path().to_str().unwrap()])
        .env("FRACFM_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 3);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("validation.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 3);
}
