use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_thzvr");

fn thzvr(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("THZVR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn value(csv: &str, quantity: &str) -> f64 {
    csv.lines()
        .find(|l| {
            l.starts_with(&format!("{quantity},")) || l.starts_with(&format!("\"{quantity}\","))
        })
        .and_then(|l| l.rsplit(',').nth(1))
        .unwrap_or_else(|| panic!("{quantity} missing from\n{csv}"))
        .parse()
        .unwrap()
}

#[test]
fn preset_echoes_table_values() {
    let o = thzvr(&["--preset", "table2_1thz", "config"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("f = 1000000000000.0"), "{s}");
    assert!(s.contains("w = 15000000000.0"));
    assert!(s.contains("k = 0.0016"));
}

#[test]
fn unstable_edge_queue_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.toml", "[queues]\nlambda1 = 5.0\nmu1 = 5.0\n");
    let o = thzvr(&["--config", &p, "config"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("mu1") && err.contains("lambda1"), "{err}");
}

#[test]
fn empty_and_malformed_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.toml", "");
    assert_eq!(
        thzvr(&["--config", &empty, "config"]).status.code(),
        Some(2)
    );
    let bad = write(dir.path(), "b.toml", "[channel]\nw = 15e9\nbogus = 1\n");
    let o = thzvr(&["--config", &bad, "config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        thzvr(&["reproduce", "11", "--out", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(
        thzvr(&["analyze", "--mode", "sideways"]).status.code(),
        Some(2)
    );
    let o = Command::new(BIN)
        .args(["simulate", "--runs", "1"])
        .env("THZVR_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn model_domain_error_exits_4() {
    let o = thzvr(&["analyze", "--alpha-c", "1.5"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn guaranteed_los_meets_five_nines() {
    let o = thzvr(&["analyze", "--mode", "guaranteed-los", "--delta", "0.020"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("# thzvr-analyze v1\nquantity,params_hash,value,units\n"));
    assert!(value(&s, "reliability[delta=0.02]") >= 0.99999);
}

#[test]
fn guaranteed_los_writes_the_cdf_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = thzvr(&[
        "analyze",
        "--mode",
        "guaranteed-los",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let grid = std::fs::read_to_string(dir.path().join("g.phi.csv")).unwrap();
    assert!(grid.starts_with("# thzvr-phi v1\nt,cdf\n"));
    let last: f64 = grid
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 1.0).abs() < 1e-6);
}

#[test]
fn tvar_rows_do_not_decrease() {
    let s = stdout(&thzvr(&["analyze", "--alpha-c", "0.9,0.99"]));
    let rows: Vec<&str> = s.lines().filter(|l| l.contains("tvar[")).collect();
    assert_eq!(rows.len(), 2);
    assert!(value(&s, "tvar[alpha_c=0.9]") <= value(&s, "tvar[alpha_c=0.99]"));
}

#[test]
fn analyze_is_byte_identical() {
    let a = thzvr(&["analyze", "--mode", "guaranteed-los"]);
    let b = thzvr(&["analyze", "--mode", "guaranteed-los"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_is_deterministic_and_honors_seed_precedence() {
    let a = thzvr(&["simulate", "--runs", "20", "--seed", "7"]);
    let b = thzvr(&["simulate", "--runs", "20", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(BIN)
        .args(["simulate", "--runs", "20"])
        .env("THZVR_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
    let flag_wins = Command::new(BIN)
        .args(["simulate", "--runs", "20", "--seed", "7"])
        .env("THZVR_SEED", "8")
        .output()
        .unwrap();
    assert_eq!(flag_wins.stdout, a.stdout);
    let s = stdout(&a);
    assert!(s.starts_with("# thzvr-simulate-aggregate v1\nmetric,value,stderr,runs,seed\n"));
}

#[test]
fn one_trace_has_about_sixty_requests() {
    // λ1 = 0.1 over 600 s gives Poisson(60); seven SDs is ±54.
    let s = stdout(&thzvr(&["simulate", "--runs", "1", "--emit", "traces"]));
    let rows = s.lines().skip(2).count();
    assert!(rows > 6 && rows < 114, "{rows}");
    let mut counts = Vec::new();
    for seed in 0..30 {
        let s = stdout(&thzvr(&[
            "simulate",
            "--runs",
            "1",
            "--emit",
            "traces",
            "--seed",
            &seed.to_string(),
        ]));
        counts.push(s.lines().skip(2).count() as f64);
    }
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    // Mean of 30 Poisson(60) draws has SD √2 ≈ 1.41.
    assert!((mean - 60.0).abs() < 5.0, "{mean}");
}

#[test]
fn reproduce_writes_curves_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = thzvr(&[
        "reproduce",
        "8a",
        "--runs",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("fig8a_manifest.txt")).unwrap();
    assert!(manifest.contains("figure: 8a"));
    assert!(manifest.contains("params_hash: "));
    assert!(manifest.lines().all(|l| l.contains(": ")));
    let tvar = std::fs::read_to_string(dir.path().join("fig8a_tvar.csv")).unwrap();
    let mut lines = tvar.lines();
    assert_eq!(lines.next(), Some("# thzvr-curve v1"));
    assert_eq!(lines.next(), Some("x,analytic_y,simulated_y,stderr"));
    let analytic: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(analytic.len(), 20);
    assert!(analytic.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn reproduce_uses_the_sub_thz_preset_for_7a() {
    let dir = tempfile::tempdir().unwrap();
    let o = thzvr(&[
        "reproduce",
        "7a",
        "--runs",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let manifest = std::fs::read_to_string(dir.path().join("fig7a_manifest.txt")).unwrap();
    assert!(
        manifest.contains("frequency_hz: 200000000000"),
        "{manifest}"
    );
    let delay =
        std::fs::read_to_string(dir.path().join("fig7a_mean_e2e_guaranteed_los.csv")).unwrap();
    let analytic: Vec<f64> = delay
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(analytic.windows(2).all(|w| w[1] <= w[0]));
}
