use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn contagion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contagion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn tiny_grid_solve_writes_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = contagion(&["solve", "--grid-steps", "4", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for (file, header) in [("y0.csv", "t,y0"), ("pi0.csv", "t,pi1,pi2"), ("diagonal.csv", "t,d1,d2")] {
        let text = read(dir.path(), file);
        assert_eq!(text.lines().next(), Some(header));
        let body = rows(&text);
        assert_eq!(body.len(), 5, "{file}");
        let width = header.split(',').count();
        assert!(body.iter().all(|r| r.len() == width));
        assert_eq!(body[0][0], "0");
        assert_eq!(body[4][0], "1");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        let o = contagion(&["solve", "--grid-steps", "20", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
        let o = contagion(&["simulate", "--grid-steps", "20", "--paths", "2000", "--seed", "4", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["y0.csv", "pi0.csv", "diagonal.csv", "simulate.csv"] {
        assert_eq!(read(a.path(), file), read(b.path(), file), "{file}");
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("occupied");
    fs::write(&blocker, "not a directory").unwrap();
    let o = contagion(&["solve", "--grid-steps", "4", "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn invalid_beta_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "copula.beta = 0.5\n").unwrap();
    let o = contagion(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("beta"), "{}", stderr(&o));
}

#[test]
fn usage_errors_are_validation_errors() {
    assert_eq!(contagion(&["table", "3"]).status.code(), Some(1));
    assert_eq!(contagion(&["--mode", "literal", "solve"]).status.code(), Some(1));
    assert_eq!(contagion(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(contagion(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_failure_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(&config, "market.sigma0_1 = 0.001\n").unwrap();
    let o = contagion(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--grid-steps",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cascade solve"), "{}", stderr(&o));
}

#[test]
fn check_passes_on_the_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(&["check", "--paths", "10000", "--out", dir.path().to_str().unwrap()]);
    let report = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{report}");
    assert!(report.lines().filter(|l| l.starts_with("PASS")).count() >= 10, "{report}");
    assert!(!report.contains("FAIL"));
}

#[test]
fn paper_mode_check_reports_the_expected_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(&[
        "check",
        "--mode",
        "paper",
        "--paths",
        "10000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let report = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{report}");
    let line = report.lines().find(|l| l.contains("alpha1_tail_integral")).unwrap();
    assert!(line.starts_with("EXPECTED-DEVIATION"), "{line}");
}

#[test]
fn table_two_merton_column_and_comparison_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(&["table", "2", "--compare", "--grid-steps", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = read(dir.path(), "table2.csv");
    assert_eq!(
        text.lines().next().unwrap(),
        "block,source,component,rho_s,gamma=-0.5,gamma=-0.1,gamma=0,gamma=0.5,gamma=1,merton"
    );
    let body = rows(&text);
    // 4 blocks × 2 components × (model, paper, abs_dev).
    assert_eq!(body.len(), 24);
    for r in body.iter().filter(|r| r[1] == "model") {
        let merton: f64 = r[9].parse().unwrap();
        let expected = if r[0].starts_with("rho=0.3") { 1.539 } else { 2.0 };
        assert!((merton - expected).abs() < 1e-3, "{r:?}");
        let rho_s: f64 = r[3].parse().unwrap();
        if r[0].ends_with("beta=1") {
            assert_eq!(rho_s, 0.0);
        }
    }
}

#[test]
fn figure_three_duplicates_the_jump_node() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(&["figure", "3", "--grid-steps", "50", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let body = rows(&read(dir.path(), "figure3.csv"));
    for series in ["gamma=-0.5 pi2", "gamma=-0.1 pi2"] {
        let at_tau: Vec<f64> = body
            .iter()
            .filter(|r| r[0] == series && r[1] == "0.6")
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert_eq!(at_tau.len(), 2, "{series}");
        assert!((at_tau[0] - at_tau[1]).abs() > 1e-3);
    }
    let post = |series: &str| -> Vec<String> {
        body.iter()
            .filter(|r| r[0] == series && r[1].parse::<f64>().unwrap() >= 0.6)
            .skip(1)
            .map(|r| r[2].clone())
            .collect()
    };
    assert_eq!(post("gamma=-0.5 pi2"), post("gamma=-0.1 pi2"));
}

#[test]
fn figure_one_touches_merton_at_full_recompense() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(&["figure", "1", "--grid-steps", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let body = rows(&read(dir.path(), "figure1.csv"));
    let y = |series: &str, x: &str| -> f64 {
        body.iter()
            .find(|r| r[0] == series && r[1] == x)
            .map(|r| r[2].parse().unwrap())
            .unwrap()
    };
    assert!((y("a=0.1", "1") - y("merton", "1")).abs() < 1e-3);
    assert_eq!(body.iter().filter(|r| r[0] == "merton").count(), 16);
}

#[test]
fn figure_two_value_curves_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let o = contagion(&["figure", "2", "--grid-steps", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let body = rows(&read(dir.path(), "figure2.csv"));
    let curve = |series: &str| -> Vec<f64> {
        body.iter()
            .filter(|r| r[0] == series)
            .map(|r| r[2].parse().unwrap())
            .collect()
    };
    let (v1, v05, v0) = (curve("gamma=1"), curve("gamma=0.5"), curve("gamma=0"));
    assert_eq!(v1.len(), 21);
    for k in 0..21 {
        assert!(v1[k] >= v05[k] - 1e-9 && v05[k] >= v0[k] - 1e-9, "node {k}");
    }
}
