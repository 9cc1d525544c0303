use std::path::PathBuf;
use std::process::{Command, Output};

use censored_regret::design::uncensored_benchmark;
use censored_regret::experiments::{Cell, Table};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_censored-regret")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("missing {key} in {text}"))
        .to_string()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("censored-regret-{}-{name}", std::process::id()))
}

#[test]
fn regret_matches_uncensored_benchmark() {
    let out = run(&["regret", "--design", "1.0:5", "--policy", "bsaa", "--cu", "0.8", "--co", "0.2", "--tol", "1e-3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = field(&text, "value").parse().unwrap();
    let bench = uncensored_benchmark(5, 0.8).unwrap();
    assert!((value - bench).abs() <= 1e-3, "{value} vs {bench}");
    assert!(text.contains("witness: "));
}

#[test]
fn malformed_design_exits_2() {
    let out = run(&["regret", "--design", "1.0:0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["regret", "--design", "0.9:1,0.5:1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["regret"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_exact_and_deterministic() {
    let args = ["oracle", "--dist", "1:1", "--design", "0.5:1", "--policy", "bsaa", "--mode", "exact", "--cu", "0.8", "--co", "0.2"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let mean: f64 = field(&stdout(&out), "mean").parse().unwrap();
    assert!((mean - 0.4).abs() < 1e-15);

    let mc = ["oracle", "--dist", "0:0.3,0.5:0.3,1:0.4", "--design", "0.5:3,1:1", "--policy", "km", "--mode", "mc", "--trials", "20000", "--seed", "11"];
    let a = run(&mc);
    let b = run(&mc);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let exact = run(&["oracle", "--dist", "0:0.3,0.5:0.3,1:0.4", "--design", "0.5:3,1:1", "--policy", "km"]);
    let e: f64 = field(&stdout(&exact), "mean").parse().unwrap();
    let m: f64 = field(&stdout(&a), "mean").parse().unwrap();
    let se: f64 = field(&stdout(&a), "std_error").parse().unwrap();
    assert!((e - m).abs() <= 4.0 * se);
}

#[test]
fn oracle_capacity_exits_3() {
    let out = run(&["oracle", "--dist", "0:0.3,0.5:0.3,1:0.4", "--design", "1.0:20", "--policy", "bsaa"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Monte-Carlo"));
}

#[test]
fn design_opt_outputs_and_regime() {
    let out = run(&["design-opt", "--budget", "3", "--q", "0.8", "--eps", "0.02"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "n_star"), "3");
    assert_eq!(field(&text, "levels"), "1,1,1");

    let out = run(&["design-opt", "--budget", "1", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "n_star"), "1");
    assert_eq!(field(&text, "levels"), "1");

    let out = run(&["design-opt", "--budget", "1", "--q", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_csv_round_trips() {
    let path = temp_path("sweep.csv");
    let p = path.to_str().unwrap();
    let out = run(&["sweep", "--policy", "bsaa", "--x", "0.7", "--q", "0.8", "--m", "0,2", "--n-min", "1", "--n-max", "3", "--tol", "1e-3", "--output", p]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read_to_string(&path).unwrap();
    assert!(bytes.starts_with("n,wc_regret_0_0.7,wc_regret_2_0.7,wc_regret_full_info_0.7\n"));
    let table = Table::read_csv(&path).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert_eq!(table.rows[0][2], Cell::Empty);
    assert_eq!(table.to_csv_string().unwrap(), bytes);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn sample_complexity_csv() {
    let path = temp_path("sc.csv");
    let p = path.to_str().unwrap();
    let out = run(&["sample-complexity", "--q", "0.8", "--target-frac", "0.25", "--x", "0.9,0.2", "--n-cap", "40", "--mesh", "0.05", "--refine", "0", "--output", p]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = Table::read_csv(&path).unwrap();
    assert_eq!(table.header, vec!["x", "num_sample_0.04"]);
    assert!(matches!(table.rows[0][1], Cell::Int(_)));
    // a level of 0.2 never reveals the 0.8-quantile
    assert_eq!(table.rows[1][1], Cell::Empty);
    std::fs::remove_file(&path).unwrap();

    let out = run(&["sample-complexity", "--q", "0.8", "--target-frac", "1.0", "--output", p]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_4() {
    let out = run(&["sweep", "--x", "0.7", "--m", "1", "--n-min", "5", "--n-max", "5", "--output", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
}
