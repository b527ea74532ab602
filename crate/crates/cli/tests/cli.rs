use std::path::PathBuf;
use std::process::{Command, Output};

fn hgauge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgauge")).args(args).output().expect("binary runs")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hgauge-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_named_fixtures() {
    let ok = hgauge(&["validate", "adjoint:sl2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).ends_with("valid\n"));

    let bad = hgauge(&["validate", "sabotaged:sl2", "--n", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("INVALID"));

    let missing = hgauge(&["validate", "adjoint:e8"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn passing_run_writes_report() {
    let dir = scratch("pass");
    let out = dir.join("report.json");
    let o = hgauge(&[
        "run",
        "--suites",
        "bianchi,cs-descent",
        "--instances",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--dump-dir",
        dir.join("dumps").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 2);
    assert!(suites.iter().all(|s| s["failed"] == 0 && s["passed"] == 5));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn failing_run_prints_a_replayable_repro() {
    let dir = scratch("fail");
    let dumps = dir.join("dumps");
    let o = hgauge(&["run", "--suites", "wzw", "--instances", "10", "--dump-dir", dumps.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let repro = text.lines().find_map(|l| l.trim().strip_prefix("repro: ")).expect("repro line").to_string();
    assert!(std::fs::read_dir(&dumps).unwrap().count() > 0);

    let mut args: Vec<&str> = repro.split_whitespace().skip(1).collect();
    args.extend(["--dump-dir", dumps.to_str().unwrap()]);
    let replay = hgauge(&args);
    assert_eq!(replay.status.code(), Some(1));
    assert!(stdout(&replay).contains("wzw"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(hgauge(&["run", "--suites", "nope"]).status.code(), Some(2));
    assert_eq!(hgauge(&["run", "--groups", "rotation"]).status.code(), Some(2));
    assert_eq!(hgauge(&["show-example", "nope"]).status.code(), Some(2));
}

#[test]
fn show_example_prints_cs_form() {
    let o = hgauge(&["show-example", "cs"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(-1/2*x5) dx1∧dx2∧dx3∧dx4"));
}
