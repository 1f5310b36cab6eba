use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn selfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfsim")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let d = dir.to_str().unwrap();
    all.extend(["--out-dir", d]);
    selfsim(&all)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn ground_state_constants_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["ground-state", "--d", "1", "--p", "5", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("ground_state.json"));
    let r = &doc["result"];
    assert!((f(&r["kappa"]) - 1.861_209_7).abs() < 1e-6);
    assert!((f(&r["n_c"]) - 1.360_349_5).abs() < 1e-6);
    assert_eq!(f(&doc["config"]["tol-ode"]), 1e-10);
    assert!(f(&r["shooting_tolerance"]) <= 1e-10);
    assert!(f(&r["n_c_error"]) <= 1e-6);
    let csv = fs::read_to_string(dir.path().join("ground_state.csv")).unwrap();
    assert!(csv.starts_with("# selfsim "));
    assert!(csv.contains("# tol-ode = 1e-10\n") && csv.contains("# d = 1\n"));
    let (cols, rows) = data_rows(&dir.path().join("ground_state.csv"));
    assert_eq!(cols, ["r", "q", "dq"]);
    assert!(rows.len() > 1000);
    // No temporary files left behind.
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().path().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn header_block_is_a_reusable_config() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["ground-state", "--d", "1", "--p", "3"]);
    let csv = fs::read_to_string(dir.path().join("ground_state.csv")).unwrap();
    let cfg: String = csv
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter(|l| l.contains(" = ") && !l.starts_with("# command"))
        .map(|l| format!("{}\n", &l[2..]))
        .collect();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, cfg).unwrap();
    let again = tempfile::tempdir().unwrap();
    let out = run_in(again.path(), &["ground-state", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (a, b) = (json(&dir.path().join("ground_state.json")), json(&again.path().join("ground_state.json")));
    assert_eq!(a["result"], b["result"]);
    assert_eq!(f(&b["result"]["p"]), 3.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, "# comment\nd = 1\np = 5\nsigma = 1e-3\n").unwrap();
    let out = run_in(dir.path(), &["basis", "--config", cfg_path.to_str().unwrap(), "--sigma", "3e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("basis.json"));
    assert_eq!(f(&doc["config"]["sigma"]), 3e-3);
    // b solves the σ law with the constants of the ground state at the same exponent.
    let gs_dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(gs_dir.path(), &["ground-state", "--d", "1", "--sigma", "3e-3"]).status.code(), Some(0));
    let gs = json(&gs_dir.path().join("ground_state.json"));
    assert_eq!(f(&gs["result"]["p"]), f(&doc["result"]["p"]));
    let (kappa, n_c, b) = (f(&gs["result"]["kappa"]), f(&gs["result"]["n_c"]), f(&doc["result"]["b"]));
    let law = kappa * kappa / n_c / b * (-std::f64::consts::PI / b).exp();
    assert!((law / 3e-3 - 1.0).abs() < 1e-9, "{law}");
    assert!((f(&doc["result"]["p"]) - 1.0 - 4.0 / (1.0 - 6e-3)).abs() < 1e-14);
    let (cols, rows) = data_rows(&dir.path().join("basis.csv"));
    assert_eq!(cols, ["r", "a", "d", "b"]);
    assert_eq!(rows.len() as u64, doc["result"]["nodes"].as_u64().unwrap());

    fs::write(&cfg_path, "d = 1\ncolour = red\n").unwrap();
    let bad = run_in(dir.path(), &["basis", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run_in(dir.path(), &["ground-state", "--p", "5"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("Usage"));
    let range = run_in(dir.path(), &["solve", "--d", "1", "--p", "5", "--sigma", "0.5"]);
    assert_eq!(range.status.code(), Some(1));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "no files on failure");
    assert_eq!(selfsim(&["solve", "--d", "x"]).status.code(), Some(1));
    assert_eq!(selfsim(&["--help"]).status.code(), Some(0));
    assert_eq!(run_in(dir.path(), &["solve", "--d", "1", "--sigma", "1e-3", "--tol-ode", "0"]).status.code(), Some(1));
}

#[test]
fn solve_reports_zero_energy_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--d", "1", "--p", "5", "--sigma", "1e-3"];
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("diagnostics.json"));
    let e = &doc["result"]["diagnostics"]["energy"];
    assert!(f(&e["energy"]).abs() <= f(&e["error"]), "{e}");
    assert_eq!(doc["result"]["energy_consistent_with_zero"], Value::Bool(true));
    assert_eq!(doc["result"]["law"]["converged"], Value::Bool(true));
    let (cols, rows) = data_rows(&dir.path().join("profile.csv"));
    assert_eq!(cols, ["r", "re_psi", "im_psi", "abs_psi", "re_p", "im_p"]);
    let radii: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(radii.windows(2).all(|w| w[1] > w[0]));

    let names = ["diagnostics.json", "profile.csv", "law_row.csv"];
    let before: Vec<Vec<u8>> = names.iter().map(|n| fs::read(dir.path().join(n)).unwrap()).collect();
    run_in(dir.path(), &args);
    let after: Vec<Vec<u8>> = names.iter().map(|n| fs::read(dir.path().join(n)).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn failed_solve_exits_two_with_best_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["solve", "--d", "1", "--sigma", "1e-3", "--tol-newton", "1e-30", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&dir.path().join("best_iterate.json"));
    assert_eq!(doc["result"]["law"]["converged"], Value::Bool(false));
    assert!(!dir.path().join("profile.csv").exists());
}

const LAW_COLUMNS: [&str; 18] = [
    "sigma", "p", "b", "b_sigma", "b_dev", "rho", "rho_sigma", "rho_dev", "gamma", "gamma_sigma", "theta",
    "theta_sigma", "residual", "condition", "iterations", "converged", "strict_box", "error",
];

#[test]
fn default_sweep_tracks_the_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["sweep", "--d", "1", "--p", "5", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = data_rows(&dir.path().join("law_table.csv"));
    assert_eq!(cols, LAW_COLUMNS);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[15] == "true"));
    let dev: Vec<f64> = rows.iter().map(|r| r[4].parse::<f64>().unwrap().abs()).collect();
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
    let summary = json(&dir.path().join("sweep_summary.json"));
    assert_eq!(summary["result"]["b_dev_strictly_decreasing"], Value::Bool(true));
    assert_eq!(summary["result"]["diagnostics"].as_array().unwrap().len(), 4);
}

#[test]
fn single_sigma_sweep_matches_solve() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_in(a.path(), &["sweep", "--d", "1", "--sigma-list", "3e-3"]).status.code(), Some(0));
    assert_eq!(run_in(b.path(), &["solve", "--d", "1", "--sigma", "3e-3"]).status.code(), Some(0));
    let (da, db) = (json(&a.path().join("diagnostics.json")), json(&b.path().join("diagnostics.json")));
    assert_eq!(da["result"], db["result"]);
    assert_eq!(data_rows(&a.path().join("profile.csv")), data_rows(&b.path().join("profile.csv")));
}

#[test]
fn sweep_with_no_converged_row_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["sweep", "--d", "1", "--sigma-list", "1e-2,3e-3", "--tol-newton", "1e-30", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let (_, rows) = data_rows(&dir.path().join("law_table.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[15] == "false"));
    let ascending = run_in(dir.path(), &["sweep", "--d", "1", "--sigma-list", "1e-3,1e-2"]);
    assert_eq!(ascending.status.code(), Some(1));
}

#[test]
fn verify_passes_and_detects_a_perturbed_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("verify.json"));
    let suites = doc["result"]["suites"].as_array().unwrap();
    assert!(suites.len() >= 10);
    assert!(suites.iter().all(|s| s["passed"] == Value::Bool(true) && s["max_residual"].is_number()));

    let out = run_in(dir.path(), &["verify", "--perturb-kappa-b", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa-b-identity"));
    let doc = json(&dir.path().join("verify.json"));
    let failed: Vec<&str> = doc["result"]["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["passed"] == Value::Bool(false))
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["kappa-b-identity"]);
}
