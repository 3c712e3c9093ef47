//! The `orlicz-lab` binary against the golden configs in `configs/`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz-lab")).args(args).env_remove("ORLICZ_LAB_JOBS").output().unwrap()
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = lab(args);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json, stderr)
}

fn with_edit(name: &str, dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(golden(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(format!("edited_{name}"));
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

#[test]
fn gauge2d_of_product_example() {
    let cfg = golden("lebesgue.json");
    let (code, json, _) = run(&["norm", "--kind", "gauge2d", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["value"].to_string(), "0.333333333333");
}

#[test]
fn lp_of_zero_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_edit("lebesgue.json", dir.path(), |v| {
        v["function"] = serde_json::json!({"kind": "nodes1d", "x": [0, 0.5, 1], "values": [0, 0, 0]});
    });
    let (code, json, _) = run(&["norm", "--kind", "lp", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["value"], Value::from(0.0));
}

#[test]
fn every_norm_kind_runs() {
    let cfg = golden("weighted.json");
    for kind in ["gauge2d", "mixed", "hat", "iterated"] {
        let (code, json, err) = run(&["norm", "--kind", kind, "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, 0, "{kind}: {err}");
        assert!(json["value"].as_f64().unwrap() > 0.0);
    }
    // one-dimensional kinds need a one-dimensional function
    let (code, _, err) = run(&["norm", "--kind", "gauge1d", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("one-dimensional"), "{err}");
}

#[test]
fn malformed_density_kind_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_edit("lebesgue.json", dir.path(), |v| v["nu2"]["density"]["kind"] = "gaussian".into());
    let (code, _, err) = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("nu2.density"), "{err}");
}

#[test]
fn unknown_field_and_missing_config_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_edit("lebesgue.json", dir.path(), |v| v["extra"] = 1.into());
    assert_eq!(run(&["kconst", "--config", cfg.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["kconst"]).0, 2);
    assert_eq!(run(&["kconst", "--config", "/nonexistent/config.json"]).0, 2);
}

#[test]
fn kconst_reports_both_constants() {
    let cfg = golden("lebesgue.json");
    let (code, json, _) = run(&["kconst", "--axis", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (k, kt) = (json["K"].as_f64().unwrap(), json["K_tilde"].as_f64().unwrap());
    // each one-sided supremum is 3/16 and K is their sum
    assert!((k - 0.375).abs() < 1e-4 && (kt - 0.375).abs() < 1e-4, "{json}");
    assert!((json["report"]["sup_terms"][0].as_f64().unwrap() - 0.1875).abs() < 1e-4);
}

#[test]
fn kconst_single_sup_for_p_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_edit("lebesgue.json", dir.path(), |v| v["p1"] = 1.into());
    let (code, json, _) = run(&["kconst", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["single_sup"], Value::Bool(true));
    assert_eq!(json["K"], json["K_tilde"]);
}

#[test]
fn kconst_divergent_weight_is_inf() {
    let cfg = golden("divergent.json");
    let (code, json, _) = run(&["kconst", "--axis", "2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["K"], Value::from("inf"));
}

#[test]
fn verify_writes_reports_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden("lebesgue.json");
    let (code, json, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["failed"], Value::from(0));
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "verify");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["result_files"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with(r#""name","lhs","rhs","slack","relative_slack","passed","seed","grid""#));
    assert!(!dir.path().join("summary.csv.tmp").exists());
}

#[test]
fn hypothesis_failure_is_skipped_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden("exp_power.json");
    let (code, json, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["failed"], Value::from(0));
    assert!(json["skipped"].as_u64().unwrap() > 0);
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(r#""skipped""#)), "{csv}");
}

#[test]
fn halved_constant_fails_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_edit("lebesgue.json", dir.path(), |v| {
        v["p1"] = 1.into();
        v["p2"] = 1.into();
    });
    let (code, json, err) = run(&["verify", "--config", cfg.to_str().unwrap(), "--c1-scale", "0.5"]);
    assert_eq!(code, 1);
    assert!(json["failed"].as_u64().unwrap() > 0);
    assert!(err.contains("FAILED") && err.contains("diagnostics"), "{err}");
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden("divergent.json");
    let mut outputs = Vec::new();
    for (k, jobs) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(k.to_string());
        let status = Command::new(env!("CARGO_BIN_EXE_orlicz-lab"))
            .args(["verify", "--seed", "3", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("ORLICZ_LAB_JOBS", jobs)
            .output()
            .unwrap();
        assert!(status.status.success());
        outputs.push(std::fs::read(out.join("summary.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(r#",3,"4x4""#), "{text}");
}

#[test]
fn statement_exponent_changes_only_the_prefactor() {
    let cfg = golden("weighted.json");
    let path = cfg.to_str().unwrap();
    let (_, proof, _) = run(&["norm", "--kind", "hat", "--config", path]);
    let (_, statement, _) = run(&["norm", "--kind", "hat", "--config", path, "--statement-exponent", "statement"]);
    assert_eq!(proof["value"], statement["value"]);
    let (code, _, _) = run(&["verify", "--config", path, "--statement-exponent", "statement", "--tolerance", "1e-5"]);
    assert!(code == 0 || code == 1);
}

#[test]
fn probe_table_grows_for_divergent_weight() {
    let cfg = golden("divergent.json");
    let (code, json, _) = run(&["probe", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["monotone"], Value::Bool(true));
    assert_eq!(json["growth"].as_array().unwrap().len(), 5);
}
