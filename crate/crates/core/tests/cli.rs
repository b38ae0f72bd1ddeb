use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-lab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const REPORT_FIELDS: [&str; 15] = [
    "config",
    "s",
    "kernel",
    "normalization",
    "family",
    "sample_id",
    "sup_B_r(x2)",
    "inf_B_r(x1)",
    "avg_B_r(x2)",
    "tail_term",
    "tail_remainder",
    "C_estimate",
    "trivial",
    "seed",
    "N",
];

#[test]
fn harnack_json_has_the_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let o = run(&[
        "harnack", "run", "--x1", "-2", "--x2", "2", "--r", "1", "--R", "16", "--s", "0.5", "--data", "random",
        "--samples", "3", "--seed", "7", "--N", "32", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        let keys: std::collections::BTreeSet<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        let expected: std::collections::BTreeSet<&str> = REPORT_FIELDS.into_iter().collect();
        assert_eq!(keys, expected);
        assert_eq!(r["seed"], 7);
        assert_eq!(r["N"], 32);
    }
}

#[test]
fn same_spec_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let o = run(&[
            "harnack", "run", "--s", "0.4", "--data", "random", "--samples", "4", "--seed", "3", "--N", "32",
            "--format", "csv", "-o", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        texts.push(fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn sweep_csv_has_a_row_per_order_and_sample() {
    let o = run(&[
        "harnack", "sweep", "--s-grid", "0.5,0.7,0.9", "--normalize-1ms", "--data", "random", "--samples", "2",
        "--N", "16", "--points", "21", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s,sample_id,sup,inf,avg,tail,C_estimate");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 2);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        let mantissa = cols[2].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["harnack", "run", "--data", "random"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["solve1d", "--s", "0.5", "--data", "triangle:1"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "s = 0.5\nthis line has no separator\n").unwrap();
    let o = run(&["harnack", "mp", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ConfigParseError"));
    // Separation |x1 - x2| = 1 < 4r.
    assert_eq!(run(&["harnack", "mp", "--s", "0.5", "--x1", "0", "--x2", "1"]).status.code(), Some(3));
    assert_eq!(run(&["harnack", "mp", "--config", "/nonexistent/file.cfg"]).status.code(), Some(3));
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_nonlocal-lab"))
        .args(["poisson", "eval", "--s", "0.5", "--x", "0", "--z", "2"])
        .env("NONLOCAL_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_nonlocal-lab"))
        .args(["poisson", "eval", "--s", "0.5", "--x", "0", "--z", "2"])
        .env("NONLOCAL_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn ellipticity_failure_exits_1() {
    // The built-in anisotropic kernel needs Λ = 1.5.
    let o = run(&["evalL", "--kernel", "general", "--s", "0.5", "--lambda", "1.2", "--barrier", "w1", "--x", "-2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn domain_violation_is_reported() {
    // x outside the ball is rejected by the Poisson kernel.
    let o = run(&["poisson", "extend", "--s", "0.5", "--x", "1.5", "--data", "indicator:1,3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DomainViolation"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.cfg");
    fs::write(&cfg, "x1 = -2\nx2 = 2\nr = 1\nR = 16\ns = 0.25\n").unwrap();
    let from_file = run(&["evalL", "--config", cfg.to_str().unwrap(), "--barrier", "w1", "--x", "-2"]);
    let overridden = run(&["evalL", "--config", cfg.to_str().unwrap(), "--s", "0.5", "--barrier", "w1", "--x", "-2"]);
    let a: Value = serde_json::from_slice(&from_file.stdout).unwrap();
    let b: Value = serde_json::from_slice(&overridden.stdout).unwrap();
    let (a, b) = (a[0]["value"].as_f64().unwrap(), b[0]["value"].as_f64().unwrap());
    // -2 ∫_3^5 t^(-1-2s) dt for each order.
    assert!((a - 4.0 * (5f64.powf(-0.5) - 3f64.powf(-0.5))).abs() < 1e-8);
    assert!((b - -2.0 * (1.0 / 3.0 - 1.0 / 5.0)).abs() < 1e-8);
}

#[test]
fn evall_on_constant_data_is_zero() {
    let o = run(&["evalL", "--s", "0.3", "--data", "const:7", "--x", "-2.5,-2,-1.5"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for row in v.as_array().unwrap() {
        assert_eq!(row["value"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn solve1d_csv_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("matrix.csv");
    let o = run(&[
        "solve1d", "--s", "0.5", "--data", "const:5", "--N", "8", "--dump-matrix", dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let u: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((u - 5.0).abs() < 1e-10);
    }
    let matrix = fs::read_to_string(&dump).unwrap();
    assert!(matrix.starts_with("# rows=8"));
    assert_eq!(matrix.lines().count(), 2 + 8);
}

#[test]
fn custom_data_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("data.cfg");
    fs::write(&cfg, "s = 0.5\npieces = 1 3 1\n").unwrap();
    let custom = run(&["solve1d", "--config", cfg.to_str().unwrap(), "--data", "custom", "--N", "16"]);
    let indicator = run(&["solve1d", "--s", "0.5", "--data", "indicator:1,3", "--N", "16"]);
    assert_eq!(custom.status.code(), Some(0));
    let values = |o: &Output| -> Vec<f64> {
        stdout(o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
    };
    let (a, b) = (values(&custom), values(&indicator));
    assert_eq!(a.len(), 16);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn poisson_subcommands() {
    let o = run(&["poisson", "eval", "--s", "0.5", "--x", "0", "--z", "1.4142135623730951"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,z,P,ratio");
    let p: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((p - 0.2250791).abs() < 1e-7);

    let o = run(&["poisson", "extend", "--s", "0.5", "--x", "0", "--data", "indicator:1,3"]);
    let u: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((u - 0.3918266).abs() < 1e-6);

    let o = run(&["poisson", "bounds", "--s", "0.5", "--samples", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["samples"], 64);
}

#[test]
fn mp_and_barrier_reports() {
    let o = run(&["harnack", "mp", "--s", "0.25", "--far", "-1", "--N", "64"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["min_u"].as_f64().unwrap() < 0.0);
    assert!(v["C_empirical"].as_f64().unwrap() > 0.0);

    let o = run(&["harnack", "barrier", "--s", "0.25", "--points", "21", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 22);
    for row in text.lines().skip(1) {
        let lv: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(lv <= 0.0);
    }
}
