use std::fs;
use std::path::Path;
use std::process::Command;

fn cartan(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_cartan")).args(args).output().expect("spawn cartan");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn run_text(text: &str, extra: &[&str]) -> (i32, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tasks.json");
    fs::write(&file, text).unwrap();
    let out = dir.path().join("out");
    let mut args = vec!["run", file.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, _, _) = cartan(&args);
    (code, dir)
}

const RING: &str = r#"{"z_order": 3, "energy_cut": "8", "e_window": [-16, 16], "t": [], "norm_constant": "2"}"#;

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn shipped_flatness_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = cartan(&["run", "p1-dubrovin-flatness", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p1-dubrovin-flatness.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert!(r["data"]["operators"][0]["rows"].is_array());
}

#[test]
fn shipped_suite_counts_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = cartan(&["run", "hoch-identity-suite", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hoch-identity-suite.json")).unwrap()).unwrap();
    assert_eq!(r["seed"], 42);
    let per = r["data"]["per_identity"].as_object().unwrap();
    assert_eq!(per.len(), 15);
    for (name, v) in per {
        assert_eq!(v["zero_residuals"], 50, "{name}");
    }
}

#[test]
fn malformed_ring_is_a_schema_error() {
    let (code, _) = run_text(r#"{"ring": {"z_order": "three"}, "tasks": []}"#, &[]);
    assert_eq!(code, 2);
    let (code, _) = run_text("not json", &[]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_fixture_is_a_schema_error() {
    let text = format!(r#"{{"ring": {RING}, "inputs": {{"category": "sphere"}}, "tasks": [{{"kind": "ch-check"}}]}}"#);
    let (code, dir) = run_text(&text, &[]);
    assert_eq!(code, 2);
    assert!(report(dir.path(), "00-ch-check")["error"].as_str().unwrap().contains("sphere"));
}

#[test]
fn failed_hypothesis_is_a_precondition_error() {
    // the gapped element lives on k[x]/(x²) only
    let text = format!(r#"{{"ring": {RING}, "inputs": {{"category": "a2"}}, "tasks": [{{"kind": "connection", "params": {{"gamma": "gapped"}}}}]}}"#);
    let (code, _) = run_text(&text, &[]);
    assert_eq!(code, 3);
}

#[test]
fn non_mc_gamma_is_a_precondition_error() {
    let ring = r#"{"z_order": 3, "t_order": 2, "energy_cut": "2", "e_window": [0, 4], "t": [{"name": "t", "degree": 0}], "norm_constant": 2}"#;
    let gamma = r#"[{"inputs": [], "output": "x", "coeff": "e"}]"#;
    let text = format!(r#"{{"ring": {ring}, "inputs": {{"category": "kx2"}}, "tasks": [{{"kind": "connection", "params": {{"gamma": {gamma}}}}}]}}"#);
    let (code, dir) = run_text(&text, &[]);
    assert_eq!(code, 3);
    assert!(report(dir.path(), "00-connection")["error"].as_str().unwrap().contains("maurer-cartan"));
}

#[test]
fn mutation_is_a_residual_failure() {
    let text = format!(
        r#"{{"ring": {RING}, "inputs": {{"category": "kx2"}}, "tasks": [{{"name": "m", "kind": "verify-identities", "seed": 1, "params": {{"trials": 10, "mutation": "lie-wrap-sign"}}}}]}}"#
    );
    let (code, dir) = run_text(&text, &[]);
    assert_eq!(code, 1);
    let r = report(dir.path(), "m");
    assert_eq!(r["status"], "residual-failure");
    assert!(r["data"]["per_identity"]["lie-module"]["nonzero_residuals"].as_u64().unwrap() > 0);
}

#[test]
fn reruns_are_byte_identical_across_job_counts() {
    let text = crate_task("kx2-gapped-connections");
    let (c1, a) = run_text(&text, &["--jobs", "1"]);
    let (c2, b) = run_text(&text, &["--jobs", "4"]);
    assert_eq!((c1, c2), (0, 0));
    for name in ["kx2-chain-theorems", "kx2-renaming-compatibility"] {
        let x = fs::read(a.path().join("out").join(format!("{name}.json"))).unwrap();
        let y = fs::read(b.path().join("out").join(format!("{name}.json"))).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn seed_override_changes_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = cartan(&["run", "hoch-identity-suite", "--out", dir.path().to_str().unwrap(), "--seed-override", "7"]);
    assert_eq!(code, 0);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hoch-identity-suite.json")).unwrap()).unwrap();
    assert_eq!(r["seed"], 7);
}

#[test]
fn no_temporary_files_left() {
    let dir = tempfile::tempdir().unwrap();
    cartan(&["run", "kx2-cyclic-homology", "--out", dir.path().to_str().unwrap()]);
    let names: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names, vec!["kx2-negative-cyclic.json".to_string()]);
}

#[test]
fn explain_prints_formulas() {
    let (code, out, _) = cartan(&["explain", "eq-3.4"]);
    assert_eq!(code, 0);
    assert!(out.contains("[d, I_y]+I_{δy}+z𝓛_y=0"));
    let (_, out, _) = cartan(&["explain", "prop-6.4"]);
    assert!(out.contains("[B, ρ_{φ,ψ}] + B¹_{[φ,ψ]} - (-1)^{|φ|'}[𝓛_φ, B¹_ψ] = 0"));
    let (code, _, err) = cartan(&["explain", "eq-9.9"]);
    assert_ne!(code, 0);
    assert!(err.contains("eq-3.4") && err.contains("prop-6.4"));
}

#[test]
fn list_fixtures_names_shipped_tasks() {
    let (code, out, _) = cartan(&["list-fixtures"]);
    assert_eq!(code, 0);
    assert!(out.contains("kx2") && out.contains("qh-p1") && out.contains("p1-dubrovin-flatness"));
}

fn crate_task(name: &str) -> String {
    cartan_cli::shipped::get(name).unwrap().to_string()
}
