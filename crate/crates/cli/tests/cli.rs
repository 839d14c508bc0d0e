use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

const SECTION6: &str = r#"
hamiltonian = "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4"
n = 2
base_point = ["pi/6", "1", "b*(pi/6)^4", "2/a"]
seed = 7
[params]
a = 1
b = 1
"#;

fn run(dir: &Path, stage: &str, config: &str, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_holohje"))
        .arg(stage)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn artifact(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

#[test]
fn pipeline_solves_and_verifies_the_trigonometric_example() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = run(dir.path(), "run-all", SECTION6, &[]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(artifact(dir.path(), "annihilate.json")["body"]["d"], 5);
    let solve = artifact(dir.path(), "solve.json");
    let chosen: Vec<f64> = solve["body"]["chosen"][0].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(chosen, vec![0.0, 1.0, 0.0, -2.0, 0.0]);
    let det = solve["body"]["projectivity"]["det"].as_f64().unwrap();
    assert!((det.abs() - 1.0).abs() < 1e-10);
    let verify = artifact(dir.path(), "verify.json");
    assert_eq!(verify["body"]["passed"], true);
    assert!(dir.path().join("out/flow.csv").exists());
    assert!(dir.path().join("out/reconstruct.csv").exists());
}

#[test]
fn artifacts_are_reproducible_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "gamma", SECTION6, &[]).0, 0);
    let first = fs::read(dir.path().join("out/gamma.json")).unwrap();
    let (code, stdout) = run(dir.path(), "gamma", SECTION6, &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("up to date"), "{stdout}");
    let (code, stdout) = run(dir.path(), "gamma", SECTION6, &["--force"]);
    assert_eq!(code, 0);
    assert!(!stdout.contains("up to date"));
    assert_eq!(fs::read(dir.path().join("out/gamma.json")).unwrap(), first);
    // A different seed changes the configuration hash and invalidates the artifact.
    let (_, stdout) = run(dir.path(), "gamma", SECTION6, &["--seed", "8"]);
    assert!(!stdout.contains("up to date"));
    let gamma = artifact(dir.path(), "gamma.json");
    assert_eq!(gamma["header"]["upstream"]["stage"], "pfaffian");
}

#[test]
fn single_variable_polynomial_has_two_dimensional_system() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "hamiltonian = \"x1\"\nn = 1\nbase_point = [\"1\", \"1\"]\npolynomial_form = \"nilpotent\"\n";
    let (code, _) = run(dir.path(), "annihilate", cfg, &[]);
    assert_eq!(code, 0);
    let a = artifact(dir.path(), "annihilate.json");
    assert_eq!(a["body"]["d"], 2);
    assert_eq!(a["body"]["qbar"], serde_json::json!([1.0, 1.0]));
}

#[test]
fn malformed_expression_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "hamiltonian = \"x1 +* p1\"\nn = 1\nbase_point = [\"1\", \"1\"]\n";
    let (code, _) = run(dir.path(), "annihilate", cfg, &[]);
    assert_eq!(code, 2);
    let e = artifact(dir.path(), "error.json");
    assert_eq!(e["error"], "SyntaxError");
    assert_eq!(e["position"], 4);
}

#[test]
fn zero_level_budget_is_a_resource_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SECTION6}\n[gamma]\nl_max = 0\n");
    let (code, _) = run(dir.path(), "gamma", &cfg, &[]);
    assert_eq!(code, 3);
    assert_eq!(artifact(dir.path(), "error.json")["error"], "ResourceLimit");
}

#[test]
fn scalar_system_has_single_gamma_element() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "hamiltonian = \"exp(x1)\"\nn = 1\nbase_point = [\"0.5\", \"1\"]\n";
    let (code, stdout) = run(dir.path(), "gamma", cfg, &[]);
    assert_eq!(code, 0);
    assert!(stdout.contains("t = 1"));
}

#[test]
fn one_degree_of_freedom_needs_no_further_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "hamiltonian = \"(p1^2 + x1^2)/2\"\nn = 1\nbase_point = [\"1\", \"0.5\"]\npolynomial_form = \"nilpotent\"\n[verify]\nflow_duration = 6.283185307179586\n";
    let (code, stdout) = run(dir.path(), "run-all", cfg, &[]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(artifact(dir.path(), "solve.json")["body"]["chosen"], serde_json::json!([]));
    let metrics = artifact(dir.path(), "verify.json")["body"]["metrics"].clone();
    let conservation = metrics.as_array().unwrap().iter().find(|m| m["name"] == "conservation").unwrap();
    assert!(conservation["value"].as_f64().unwrap() < 1e-7);
}

#[test]
fn unsolvable_conditions_exit_with_no_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "hamiltonian = \"p1*p2 + x1*x2\"\nn = 2\nbase_point = [\"0.7\", \"1.3\", \"0.9\", \"1.1\"]\n";
    let (code, _) = run(dir.path(), "solve", cfg, &[]);
    assert_eq!(code, 4);
    assert_eq!(artifact(dir.path(), "error.json")["error"], "NoSolution");
}

#[test]
fn violated_condition_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SECTION6.replace("seed = 7", "seed = 7\nqbars = [[0.0, 1.0, 0.0, 0.0, 0.0]]");
    let (code, _) = run(dir.path(), "run-all", &cfg, &[]);
    assert_eq!(code, 5);
    let e = artifact(dir.path(), "error.json");
    assert_eq!(e["error"], "VerificationFailure");
    assert!(e["failing"].as_array().unwrap().iter().any(|m| m == "poisson_max"));
    let metrics = artifact(dir.path(), "verify.json")["body"]["metrics"].clone();
    let poisson = metrics.as_array().unwrap().iter().find(|m| m["name"] == "poisson_max").unwrap();
    assert!(poisson["value"].as_f64().unwrap() > 1e-3);
}

#[test]
fn missing_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_holohje"))
        .args(["solve", "--config"])
        .arg(dir.path().join("absent.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
