use std::path::Path;
use std::process::{Command, Output};

fn rolekit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rolekit"))
        .current_dir(dir)
        .args(args)
        .env_remove("ROLEKIT_KRON_BUDGET")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = rolekit(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_csv_matrix(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn glrd_writes_model_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "nmf", "--size", "20,6", "--roles", "2", "--out", "v.csv"]);
    ok(d, &["glrd", "--features", "v.csv", "--roles", "2", "--out", "m.json"]);
    let model: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert!(model.is_object());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("m.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "glrd");
}

#[test]
fn zero_roles_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "nmf", "--size", "10,4", "--roles", "2", "--out", "v.csv"]);
    let out = rolekit(d, &["glrd", "--features", "v.csv", "--roles", "0", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("m.json").exists());
}

#[test]
fn analyze_rejects_role_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "nmf", "--size", "10,4", "--roles", "2", "--out", "v.csv"]);
    ok(d, &["glrd", "--features", "v.csv", "--roles", "2", "--out", "m.json"]);
    let out = rolekit(d, &["analyze", "--model", "m.json", "--out-dir", "a"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error [coreview]") && err.contains("model has no Tucker core"), "{err}");
}

#[test]
fn heatmap_of_identical_tensors_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "tucker", "--dims", "12,6,3", "--core", "2,2,2", "--seed", "3", "--out", "t.coo"]);
    std::fs::copy(d.join("t.coo"), d.join("u.coo")).unwrap();
    std::fs::copy(d.join("t.coo.labels.json"), d.join("u.coo.labels.json")).unwrap();
    ok(d, &["heatmap", "--tensors", "t.coo,u.coo", "--dims", "2,2,2", "--max-iters", "5000", "--out", "h.csv"]);
    let h = read_csv_matrix(&d.join("h.csv"));
    assert_eq!(h.len(), 2);
    assert_eq!(h[0][0], h[1][1]);
    for row in &h {
        for &x in row {
            assert!((x - h[0][0]).abs() <= 1e-6, "{h:?}");
        }
    }
}

#[test]
fn heatmap_schema_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "tucker", "--dims", "10,6,3", "--core", "2,2,2", "--out", "t.coo"]);
    ok(d, &["synth", "--kind", "tucker", "--dims", "10,5,3", "--core", "2,2,2", "--out", "u.coo"]);
    let out = rolekit(d, &["heatmap", "--tensors", "t.coo,u.coo", "--dims", "2,2,2", "--out", "h.csv"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!d.join("h.csv").exists());
}

#[test]
fn command_line_beats_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "seed = 9\n\n[synth]\nroles = 4\nsize = [15, 5]\n").unwrap();
    ok(d, &["--config", "run.toml", "synth", "--kind", "nmf", "--roles", "2", "--out", "v.csv"]);
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("v.csv.truth.json")).unwrap()).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("v.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["roles"], 2);
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["config"]["size"], serde_json::json!([15, 5]));
    assert!(truth.is_object());
    assert_eq!(std::fs::read_to_string(d.join("v.csv")).unwrap().lines().count(), 16);
}
