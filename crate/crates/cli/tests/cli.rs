use std::fs;
use std::process::{Command, Output};

fn ergo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergo"))
        .args(args)
        .env("ERGO_THREADS", "1")
        .output()
        .expect("spawn ergo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no {key} in {line:?}"))
}

#[test]
fn gnormal_of_square_is_sigma_hi() {
    let o = ergo(&["gnormal", "--f", "x^2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "value") - 1.0).abs() < 1e-3);
    let o = ergo(&["gnormal", "--f", "-x^2", "--sigma", "0.25,1"]);
    assert!((field(&stdout(&o), "value") + 0.25).abs() < 1e-3);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(ergo(&["gnormal", "--f", "x^^2"]).status.code(), Some(2));
    assert_eq!(ergo(&["gnormal", "--f", "x", "--sigma", "1,0.5"]).status.code(), Some(2));
    assert_eq!(ergo(&["solve", "--model", "nope", "--f", "x"]).status.code(), Some(2));
    // explicit step far above the stability bound
    let o = ergo(&["solve", "--model", "g_ou:0.5", "--f", "x^2", "--t-end", "0.1", "--dt", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "[model]\nname = \"g_ou:0.5\"\nsigma_lo_sq = 0.25\n\n[run]\nf = \"x^2\"\nt_end = 1.0\nx = 0.0\n").unwrap();
    let o = ergo(&["solve", "--config", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((field(&stdout(&o), "u") - (1.0 - (-1.0f64).exp())).abs() < 1e-3);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[run]\nf = \"x^2\"\nhorizon = 3\n").unwrap();
    assert_eq!(ergo(&["solve", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[run]\nf = \"x^2\"\n").unwrap();
    let o = ergo(&["gnormal", "--config", cfg.to_str().unwrap(), "--f", "-x^2"]);
    assert!(field(&stdout(&o), "value") < 0.0);
}

#[test]
fn ergodic_constant_of_centred_square() {
    let o = ergo(&["ergodic", "--model", "g_ou:0.5", "--f", "x^2 - 1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "lambda").abs() < 1e-3);
}

#[test]
fn mc_is_reproducible_and_dumps_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "mc", "--model", "g_ou:0.5", "--f", "x^2", "--n-paths", "300", "--seed", "7", "--t-end", "0.5", "--policy", "hi",
        "--dump-paths", "2", "--out", out,
    ];
    let a = ergo(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&ergo(&args)));
    let csv = fs::read_to_string(dir.path().join("paths.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,path_id,x"));
    assert_eq!(lines.count(), 2 * 501);
}

#[test]
fn solve_writes_solution_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = ergo(&[
        "solve", "--model", "g_ou:0.5", "--f", "x^2", "--t-end", "0.2", "--nx", "161", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("t,x,u\n"));
}

#[test]
fn non_dissipative_model_needs_override() {
    let args = ["invariant", "--model", "custom", "--b", "x", "--h", "0", "--sigma-x", "1", "--f", "x^2"];
    let o = ergo(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dissipativity"));
    let mut forced = args.to_vec();
    forced.push("--allow-non-dissipative");
    let o = ergo(&forced);
    // proceeds past the gate, then fails to converge
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn checks_subset_runs() {
    let o = ergo(&["paper-checks", "--only", "1,10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.starts_with("PASS")).count(), 2, "{s}");
    assert_eq!(ergo(&["paper-checks", "--only", "99"]).status.code(), Some(2));
}
