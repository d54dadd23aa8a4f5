use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

fn darboux(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darboux")).args(args).arg("--out").arg(dir).output().unwrap()
}

fn report(out: &Output) -> HashMap<String, String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(r: &HashMap<String, String>, key: &str) -> f64 {
    r.get(key).unwrap_or_else(|| panic!("missing {key}")).parse().unwrap()
}

#[test]
fn symmetric_cauchy_example_reproduces_x_plus_y() {
    let dir = tempfile::tempdir().unwrap();
    let out = darboux(dir.path(), &["solve-cauchy", "--case", "c1", "--tau", "2*x", "--nu", "0", "--n", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["status"], "ok");
    let csv = std::fs::read_to_string(dir.path().join("solve-cauchy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,U"));
    let mut rows = 0;
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[2] - v[0] - v[1]).abs() <= 1e-5, "{l}");
        rows += 1;
    }
    assert!(rows > 100);
}

#[test]
fn quad_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = darboux(dir.path(), &["quad-selftest"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["status"], "ok");
}

#[test]
fn limits_of_log_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = darboux(dir.path(), &["limits", "--case", "c1", "--field", "ln(y - x)", "--points", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((num(&r, "tau") - 4.0 * LN_2).abs() <= 1e-6);
    assert!((num(&r, "nu") - 2.0).abs() <= 1e-6);
}

#[test]
fn config_file_fills_unset_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "case = \"c3\"\ntau = \"x^2\"\nnu = \"1\"\nn = 8\nprefix = \"from-file\"\n").unwrap();
    let out = darboux(dir.path(), &["solve-cauchy", "--config", cfg.to_str().unwrap(), "--n", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["config.case"], "c3");
    assert_eq!(r["config.n"], "6");
    assert!(dir.path().join("from-file.csv").exists());
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "cases = \"c1\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = darboux(&out_dir, &["solve-cauchy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve-cauchy", "--case", "c2", "--tau", "exp(x)", "--nu", "x", "--n", "12"];
    let mut csv = Vec::new();
    for threads in ["1", "4"] {
        let d = dir.path().join(threads);
        let out = Command::new(env!("CARGO_BIN_EXE_darboux"))
            .args(args)
            .arg("--out")
            .arg(&d)
            .env("DARBOUX_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        csv.push(std::fs::read(d.join("solve-cauchy.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_darboux"))
        .arg("quad-selftest")
        .arg("--out")
        .arg(dir.path())
        .env("DARBOUX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergent_limit_is_a_solver_error_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = darboux(dir.path(), &["limits", "--case", "c1", "--field", "1/(y - x)"]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(dir.path().join("limits_report.txt")).unwrap();
    assert!(text.contains("status = error"));
}

#[test]
fn verify_reports_second_order_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let out = darboux(
        dir.path(),
        &["verify", "--case", "c1", "--tau", "x^4", "--nu", "0", "--exact", "((x+y)/2)^4 + 3*((x+y)/2)^2*((y-x)/2)^2 + 0.375*((y-x)/2)^4", "--n", "32"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn delta_problem_writes_both_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let out = darboux(dir.path(), &["solve-delta1s", "--phi1", "x^2", "--phi2", "x^2", "--n", "32", "--tol", "1e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["solve-delta1s_upper.csv", "solve-delta1s_lower.csv", "solve-delta1s_trace.csv", "solve-delta1s_report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
