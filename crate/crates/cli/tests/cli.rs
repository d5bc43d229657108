use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn imexstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imexstab"))
        .args(args)
        .env_remove("IMEXSTAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp:") && !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Data rows of a CSV with `#` metadata lines removed.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn sbdf2_coefficients() {
    let v = stdout_json(&imexstab(&["coeffs", "--r", "2", "--delta", "1"]));
    let r = &v["result"];
    let a: Vec<f64> = serde_json::from_value(r["a"].clone()).unwrap();
    let b: Vec<f64> = serde_json::from_value(r["b"].clone()).unwrap();
    let c: Vec<f64> = serde_json::from_value(r["c"].clone()).unwrap();
    assert_eq!(a, vec![0.5, -2.0, 1.5]);
    assert_eq!(b, vec![-1.0, 2.0, 0.0]);
    assert_eq!(c, vec![0.0, 0.0, 1.0]);
    assert_eq!(r["zero_stable"], true);
    assert!(r["order_condition_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["meta"]["config"]["scheme"]["r"], 2);
}

#[test]
fn coefficient_csv() {
    let out = imexstab(&["coeffs", "--r", "3", "--delta", "0.5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# zero_stable: true"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3][3].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn scalar_example_certifies() {
    let v = stdout_json(&imexstab(&[
        "certify",
        "--problem",
        "paper-scalar",
        "--r",
        "5",
        "--delta",
        "0.04",
        "--scan-step",
        "0.01",
    ]));
    assert_eq!(v["result"]["verdict"]["status"], "certified_sufficient");
    assert!((v["result"]["largest_certified_delta"].as_f64().unwrap() - 0.04).abs() < 1e-12);

    // non-certification is reported, not an error
    let v = stdout_json(&imexstab(&["certify", "--problem", "paper-scalar", "--r", "5", "--delta", "1"]));
    assert_ne!(v["result"]["verdict"]["status"], "certified_sufficient");
}

#[test]
fn region_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let status = imexstab(&["region", "--r", "2", "--delta", "0.25", "--samples", "128", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert!(rows.iter().any(|r| r[2] == "exact"));
    assert!(rows.iter().any(|r| r[2] == "locus"));
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("region.csv.summary.json")).unwrap()).unwrap();
    let m_l = summary["result"]["region"]["m_l"].as_f64().unwrap();
    // -(2 - d)^2 / (4 - (2 - d)^2)
    let want = -(1.75f64 * 1.75) / (4.0 - 1.75 * 1.75);
    assert!((m_l - want).abs() < 1e-12);

    let finite = imexstab(&["region", "--r", "2", "--delta", "0.25", "--y", "-3", "--samples", "64"]);
    let rows = csv_rows(&String::from_utf8(finite.stdout).unwrap());
    assert!(rows.iter().all(|r| r[2] == "locus"));
    assert_eq!(imexstab(&["region", "--r", "2", "--delta", "0.25", "--y", "2"]).status.code(), Some(2));
}

#[test]
fn wrange_from_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "2 2\n-2 1\n1 -2\n");
    let b = write(dir.path(), "b.txt", "2 2\n1 0\n0 -3\n");
    let out = imexstab(&["wrange", "--a", &a, "--b", &b, "--angles", "64"]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let eig: Vec<f64> = rows.iter().filter(|r| r[0] == "eigenvalue").map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(eig.len(), 2);
    // symmetric B gives a real segment between the generalized eigenvalues
    for r in rows.iter().filter(|r| r[0] == "boundary") {
        let (re, im): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!(im.abs() < 1e-12);
        assert!(re >= eig[0] - 1e-12 && re <= eig[1] + 1e-12);
    }
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let asym = write(dir.path(), "a.txt", "2 2\n-2 1\n0 -2\n");
    let b = write(dir.path(), "b.txt", "2 2\n0 1\n-1 0\n");
    let bad = write(dir.path(), "bad.txt", "2 2\n1 2\n");
    for args in [
        vec!["coeffs", "--r", "6", "--delta", "1"],
        vec!["coeffs", "--r", "2", "--delta", "0"],
        vec!["wrange", "--a", &asym, "--b", &b],
        vec!["wrange", "--a", &bad, "--b", &b],
        vec!["wrange", "--a", "/nonexistent/a.txt", "--b", &b],
        vec!["certify", "--problem", "nope", "--r", "2", "--delta", "0.5"],
        vec!["convergence", "--delta", "0.5", "--k", "1..5"],
        vec!["gte", "--deltas", "0.5", "--orders", "0..2"],
    ] {
        let out = imexstab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_imexstab"))
        .args(["coeffs", "--r", "1", "--delta", "1"])
        .env("IMEXSTAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convergence_table_layout() {
    let out = imexstab(&[
        "convergence", "--N", "16", "--delta", "0.12", "--orders", "1..2", "--k", "2^-10..2^-12", "--t-final", "0.25",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "k,error_r1,rate_r1,error_r2,rate_r2");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "");
    let rate2: f64 = rows[2][4].parse().unwrap();
    assert!((rate2 - 2.0).abs() < 0.1, "rate {rate2}");
}

#[test]
fn gte_rows_match_library() {
    let out = imexstab(&["gte", "--orders", "1", "--deltas", "2^0..2^-2", "--k-divisor", "5"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let lib = imexstab::gte_study(1, &[1.0, 0.5, 0.25], imexstab::problems::StepRule::DeltaFraction(5.0), 1.0).unwrap();
    for (row, want) in rows.iter().zip(&lib.rows) {
        assert_eq!(row[2].parse::<f64>().unwrap(), want.error);
        assert_eq!(row[1].parse::<f64>().unwrap(), want.k);
    }
}

#[test]
fn simulate_records_norms() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.txt", "1 1\n-1\n");
    let b = write(dir.path(), "b.txt", "1 1\n0\n");
    let u0 = write(dir.path(), "u0.txt", "1 1\n2\n");
    let out = imexstab(&[
        "simulate", "--a", &a, "--b", &b, "--u0", &u0, "--r", "1", "--delta", "1", "--k", "0.5", "--steps", "4",
    ]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 5);
    // backward Euler on u' = -u: u_n = 2 / 1.5^n
    for (n, row) in rows.iter().enumerate() {
        let norm: f64 = row[2].parse().unwrap();
        assert!((norm - 2.0 / 1.5f64.powi(n as i32)).abs() < 1e-14);
    }
}

#[test]
fn identical_runs_are_identical() {
    let run = |args: &[&str]| without_timestamp(&String::from_utf8(imexstab(args).stdout).unwrap());
    for args in [
        vec!["wrange", "--problem", "paper-vardiff", "--N", "12", "--angles", "32"],
        vec!["certify", "--problem", "paper-vardiff", "--N", "12", "--r", "2", "--delta", "0.3"],
        vec!["region", "--r", "4", "--delta", "0.3", "--samples", "256"],
    ] {
        let first = run(&args);
        assert!(!first.is_empty());
        assert_eq!(first, run(&args), "{args:?}");
    }
    let threaded = |n: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_imexstab"))
            .args(["wrange", "--problem", "paper-vardiff", "--N", "12", "--angles", "32"])
            .env("IMEXSTAB_THREADS", n)
            .output()
            .unwrap();
        without_timestamp(&String::from_utf8(out.stdout).unwrap())
    };
    assert_eq!(threaded("1"), threaded("4"));
}
