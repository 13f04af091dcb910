use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn mmlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmlab"))
        .current_dir(dir)
        .args(args)
        .env("MMLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn json_report(dir: &Path, out: &Output) -> Value {
    let stdout = String::from_utf8_lossy(&out.stdout);
    let path = stdout.lines().find(|l| l.ends_with(".json")).expect("report path on stdout");
    serde_json::from_str(&std::fs::read_to_string(dir.join(path)).unwrap()).unwrap()
}

fn three_points(dir: &Path) {
    write(dir, "s.json", &json!({"points": [0, 1, 2], "dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]], "weights": [0.25, 0.5, 0.25]}));
    write(dir, "a.json", &json!([0.5, 0.25, 0.25]));
    write(dir, "b.json", &json!([0.0, 0.25, 0.75]));
}

fn uniform_circle(dir: &Path, m: usize) {
    let l = 2.0 * std::f64::consts::PI;
    let ld = vec![-l.ln(); m];
    write(dir, "c.json", &json!({"kind": "circle", "total_length": l, "grid_size": m, "origin": 0.0, "log_density": ld}));
}

#[test]
fn w2_of_a_measure_with_itself_is_zero() {
    let d = tempfile::tempdir().unwrap();
    three_points(d.path());
    let out = mmlab(d.path(), &["w2", "--space", "s.json", "--mu", "a.json", "--nu", "a.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json_report(d.path(), &out);
    assert_eq!(r["result"]["value"].as_f64(), Some(0.0));
    assert_eq!(r["pass"], json!(true));
    assert_eq!(r["command"], json!("w2"));
}

#[test]
fn w2_between_distinct_measures() {
    let d = tempfile::tempdir().unwrap();
    three_points(d.path());
    let out = mmlab(d.path(), &["w2", "--space", "s.json", "--mu", "a.json", "--nu", "b.json"]);
    assert_eq!(out.status.code(), Some(0));
    // quantile coupling on the line: quarters move by 1, 2, 1 and 0
    let v = json_report(d.path(), &out)["result"]["value"].as_f64().unwrap();
    let oracle = (0.25f64 * (1.0 + 4.0 + 1.0)).sqrt();
    assert!((v - oracle).abs() < 1e-12, "{v} vs {oracle}");
}

#[test]
fn counterexample_auto_diameter_writes_passing_report() {
    let d = tempfile::tempdir().unwrap();
    let out = mmlab(d.path(), &["counterexample", "--K", "-1", "--N", "-1", "--D", "auto", "--M", "512", "--n-list", "1,2,4,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json_report(d.path(), &out);
    let want = std::f64::consts::PI * 2f64.sqrt();
    assert!((r["result"]["extra"]["d"].as_f64().unwrap() - want).abs() < 1e-15);
    for row in r["result"]["report"]["rows"].as_array().unwrap() {
        assert_ne!(row["pass"], json!(false), "{row}");
    }
    let csv = String::from_utf8_lossy(&out.stdout).lines().find(|l| l.ends_with(".csv")).unwrap().to_string();
    assert!(std::fs::read_to_string(d.path().join(csv)).unwrap().starts_with("n,quantity,value,bound,pass,source\n"));
}

#[test]
fn cd_check_on_flat_circle_with_positive_curvature_fails() {
    let d = tempfile::tempdir().unwrap();
    uniform_circle(d.path(), 128);
    let base = ["cd-check", "--space", "c.json", "--interval0", "0,1", "--interval1", "2,3", "--N", "-1"];
    let out = mmlab(d.path(), &[&base[..], &["--K", "1"]].concat());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("check failed") && err.contains("t = "), "{err}");
    assert_eq!(json_report(d.path(), &out)["pass"], json!(false));
    let out = mmlab(d.path(), &[&base[..], &["--K", "0"]].concat());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let d = tempfile::tempdir().unwrap();
    three_points(d.path());
    let out = mmlab(d.path(), &["w2", "--space", "s.json", "--mu", "a.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--nu"));
    let out = mmlab(d.path(), &["w2", "--space", "missing.json", "--mu", "a.json", "--nu", "a.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--space"));
    let out = mmlab(d.path(), &["counterexample", "--D", "wide"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--D"));
    let out = mmlab(d.path(), &["entropy", "--space", "s.json", "--nu", "a.json", "--n-prime", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n-prime"));
    let out = mmlab(d.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let d = tempfile::tempdir().unwrap();
    three_points(d.path());
    write(d.path(), "cfg.json", &json!({"tolerances": {"solver": -1.0}}));
    let out = mmlab(d.path(), &["--config", "cfg.json", "w2", "--space", "s.json", "--mu", "a.json", "--nu", "a.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn numeric_flags_round_trip_through_reports() {
    let d = tempfile::tempdir().unwrap();
    let out = mmlab(d.path(), &["bm-collapse", "--K-list", "1,10,100", "--t", "0.25", "--N", "-2.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json_report(d.path(), &out);
    assert_eq!(r["args"]["k_list"], json!([1.0, 10.0, 100.0]));
    assert_eq!(r["args"]["t"], json!(0.25));
    assert_eq!(r["args"]["n"], json!(-2.5));
    assert_eq!(r["result"]["report"]["metadata"]["t"], json!(0.25));
}

#[test]
fn config_file_and_seed_reach_the_report() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "cfg.json", &json!({"seed": 7, "out_dir": "elsewhere"}));
    let out = mmlab(d.path(), &["--config", "cfg.json", "lemma-suite", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("elsewhere"));
    assert_eq!(json_report(d.path(), &out)["config"]["seed"], json!(7));
    let out = mmlab(d.path(), &["--config", "cfg.json", "--seed", "9", "lemma-suite", "--trials", "20"]);
    assert_eq!(json_report(d.path(), &out)["config"]["seed"], json!(9));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|_| {
            let d = tempfile::tempdir().unwrap();
            uniform_circle(d.path(), 64);
            for args in [
                &["lemma-suite", "--trials", "30"][..],
                &["cosh-family", "--M", "128", "--pairs", "3", "--bm-pairs", "3"],
                &["cd-check", "--space", "c.json", "--interval0", "0,1", "--interval1", "1.5,2", "--K", "0", "--N", "-2"],
                &["thm4-verify", "--M", "64", "--kappas", "0.2"],
            ] {
                let out = mmlab(d.path(), args);
                assert!(out.status.code().unwrap() <= 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
            }
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(d.path().join("reports"))
                .unwrap()
                .map(|e| e.unwrap().path())
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            files
        })
        .collect();
    assert_eq!(runs[0].len(), 8);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn threads_variable_is_validated() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mmlab"))
        .current_dir(d.path())
        .args(["sinh-example", "--steps", "0.01"])
        .env("MMLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MMLAB_THREADS"));
}
