use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn pbracket(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbracket")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_kind(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).expect("machine-readable error");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn compute_text_and_jones() {
    let t = fixture("classical_trefoil");
    let o = pbracket(&["compute", "--input", &t, "--variant", "planar"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "-1*A^5 - 1*A^-3 + 1*A^-7");
    let o = pbracket(&["compute", "--input", &t, "--variant", "planar", "--normalize", "--jones"]);
    assert_eq!(stdout(&o).trim(), "t^1 + t^3 - t^4");
    let o = pbracket(&["compute", "--input", &fixture("kink"), "--variant", "planar", "--normalize"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn compute_errors() {
    let t = fixture("classical_trefoil");
    let o = pbracket(&["compute", "--input", &t, "--variant", "planar", "--jones"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "usage");
    let o = pbracket(&["compute", "--input", &t, "--variant", "toroidal"]);
    assert_eq!(error_kind(&o), "variant");
    let o = pbracket(&["compute", "--input", "/nonexistent.json", "--variant", "planar"]);
    assert_eq!(error_kind(&o), "io");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"surface\": \"plane\", \"crossings\": [").unwrap();
    let o = pbracket(&["compute", "--input", bad.to_str().unwrap(), "--variant", "planar"]);
    assert_eq!(error_kind(&o), "parse");
    let o = pbracket(&["compute", "--input", &t, "--variant", "planar", "--max-crossings", "2"]);
    assert_eq!(error_kind(&o), "limit");
    let o = pbracket(&["compute", "--input", &t, "--variant", "spherical"]);
    assert_eq!(error_kind(&o), "usage");
}

#[test]
fn compute_json_and_threads() {
    let f = fixture("toroidal_trefoil_kl");
    let mut outs = Vec::new();
    for threads in ["1", "2", "8"] {
        let o = pbracket(&["compute", "--input", &f, "--variant", "toroidal-reduced", "--format", "json", "--threads", threads]);
        assert!(o.status.success());
        outs.push(o.stdout);
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
    let v: Value = serde_json::from_slice(&outs[0]).unwrap();
    assert!(v.as_array().unwrap().iter().all(|t| t.get("coeff").is_some()));
    let text = stdout(&pbracket(&["compute", "--input", &f, "--variant", "toroidal-reduced"]));
    assert!(text.contains("y^2"));
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--moves", "regular", "--trials", "100", "--seed", "7", "--corpus", "builtin"];
    let a = pbracket(&args);
    let b = pbracket(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["trials"], 100);
    assert_eq!(v["passed"], 100);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_full_on_input() {
    let o = pbracket(&["verify", "--moves", "full", "--trials", "30", "--seed", "3", "--max-steps", "6", "--input", &fixture("toroidal_kr")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["moves"], "full");
    assert_eq!(v["passed"], 30);
    let o = pbracket(&["verify", "--moves", "full", "--trials", "3"]);
    assert_eq!(error_kind(&o), "usage");
}

#[test]
fn convert_with_check() {
    for (name, to) in [("annular_pseudo_trefoil", "o-mixed"), ("essential_unknot", "o-mixed"), ("toroidal_kr", "h-mixed"), ("toroidal_l1", "h-mixed")] {
        let o = pbracket(&["convert", "--input", &fixture(name), "--to", to, "--check"]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["surface"], "plane");
        assert!(v["fixed_components"].is_array());
    }
    let o = pbracket(&["convert", "--input", &fixture("pseudo_trefoil"), "--to", "o-mixed"]);
    assert!(!o.status.success());
    assert_eq!(error_kind(&o), "surface");
    let o = pbracket(&["convert", "--input", &fixture("annular_trefoil"), "--to", "planar-forgetful", "--check"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["surface"], "plane");
}

#[test]
fn gen_commands() {
    let o = pbracket(&["gen", "torus-class", "3", "2", "1", "annulus"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["surface"], "annulus");
    assert_eq!(v["crossings"].as_array().unwrap().len(), 3);
    let a = pbracket(&["gen", "random", "torus", "4", "2", "11"]);
    let b = pbracket(&["gen", "random", "torus", "4", "2", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let crossings = v["crossings"].as_array().unwrap();
    assert_eq!(crossings.len(), 4);
    assert_eq!(crossings.iter().filter(|c| c["kind"] == "pre").count(), 2);
    assert_eq!(error_kind(&pbracket(&["gen", "torus-class", "1", "-2", "1", "annulus"])), "parameter");
    assert_eq!(error_kind(&pbracket(&["gen", "random", "plane", "2", "3", "1"])), "parameter");
}

#[test]
fn generated_documents_compute() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, pbracket(&["gen", "torus-class", "3", "2", "1", "annulus"]).stdout).unwrap();
    let o = pbracket(&["compute", "--input", path.to_str().unwrap(), "--variant", "annular"]);
    let a = pbracket(&["compute", "--input", &fixture("annular_trefoil"), "--variant", "annular"]);
    assert!(o.status.success());
    assert_eq!(o.stdout, a.stdout);
}

#[test]
fn selfcheck_passes() {
    let o = pbracket(&["selfcheck"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().all(|l| l.starts_with("ok ")));
}
