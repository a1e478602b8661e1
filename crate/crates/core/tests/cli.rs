//! The `qubit-relax` binary: CSV layout, reproducibility, config files and
//! exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qubit-relax"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Column names and data rows of a CSV produced by the tool.
fn parse(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let columns = csv
        .lines()
        .find_map(|l| l.strip_prefix("# columns: "))
        .expect("columns line")
        .split(',')
        .map(String::from)
        .collect::<Vec<_>>();
    let rows = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    for r in &rows {
        assert_eq!(r.len(), columns.len(), "ragged row {r:?}");
    }
    (columns, rows)
}

#[test]
fn spectrum_csv_has_sixteen_modes() {
    let csv = stdout(&["spectrum", "--B", "0.9", "--T", "0.5"]);
    assert!(csv.starts_with("# qubit-relax spectrum\n"));
    assert!(csv.contains("# params: J=1.0000000000000000e0 B=9.0000000000000002e-1"));
    let (cols, rows) = parse(&csv);
    assert_eq!(cols, ["index", "re", "im", "rate", "frequency", "group_id", "label"]);
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let re: f64 = r[1].parse().unwrap();
        let rate: f64 = r[3].parse().unwrap();
        assert_eq!(rate, -re);
    }
}

#[test]
fn every_command_emits_its_columns() {
    let (cols, rows) = parse(&stdout(&["steady-state", "--T", "0.3"]));
    assert_eq!(cols, ["component", "value", "gibbs"]);
    assert_eq!(rows.len(), 16);

    let (cols, rows) = parse(&stdout(&["evolve", "--tmax", "2", "--nt", "5"]));
    assert_eq!(cols.len(), 18);
    assert_eq!((cols[0].as_str(), cols[17].as_str()), ("t", "concurrence"));
    assert_eq!(rows.len(), 5);

    let (cols, rows) = parse(&stdout(&[
        "concurrence-map",
        "--nT",
        "3",
        "--nt",
        "4",
        "--rho14",
        "literal",
    ]));
    assert_eq!(cols, ["T", "t", "C"]);
    assert_eq!(rows.len(), 12);

    let (cols, rows) = parse(&stdout(&[
        "sweep", "--var", "tau_M", "--from", "1e-3", "--to", "1", "--steps", "4", "--log", "--T", "0",
    ]));
    assert_eq!(cols[0], "tau_M");
    assert_eq!(cols.last().unwrap(), "ambiguous");
    assert_eq!(rows.len(), 4);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "sweep", "--var", "B", "--from", "0", "--to", "2", "--steps", "9", "--T", "0.2",
    ];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["spectrum", "--Bx", "0.3", "--T", "0", "--format", "json"];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["columns"][0], "index");
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let cfg_s = cfg.to_str().unwrap();
    stdout(&[
        "evolve",
        "--B",
        "1.1",
        "--T",
        "1",
        "--rho14",
        "0.2",
        "--tmax",
        "3",
        "--nt",
        "7",
        "-o",
        out1.to_str().unwrap(),
        "--save-config",
        cfg_s,
    ]);
    stdout(&["run", "--config", cfg_s, "-o", out2.to_str().unwrap()]);
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"J": 1.0, "B": 0.5, "T": 0.4}"#).unwrap();
    let csv = stdout(&["spectrum", "--config", cfg.to_str().unwrap(), "--B", "1.5"]);
    assert!(csv.contains("B=1.5000000000000000e0"));
    assert!(csv.contains("T=4.0000000000000002e-1"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"J": 1.0, "bogus": 2}"#).unwrap();
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    assert_eq!(run(&["spectrum", "--J", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--T", "-0.1"]).status.code(), Some(1));
    assert_eq!(
        run(&["sweep", "--var", "T", "--from", "1", "--to", "0", "--steps", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two() {
    let out = run(&["spectrum", "--J", "1e308", "--B", "1e308"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn failed_run_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    let t = target.to_str().unwrap();
    let out = run(&["spectrum", "--J", "1e308", "--B", "1e308", "-o", t]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new(t).exists());

    stdout(&["spectrum", "-o", t]);
    let good = std::fs::read(&target).unwrap();
    run(&["spectrum", "--J", "1e308", "--B", "1e308", "-o", t]);
    assert_eq!(std::fs::read(&target).unwrap(), good);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
