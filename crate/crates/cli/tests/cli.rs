use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pensemble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pensemble"))
        .args(args)
        .output()
        .expect("spawn pensemble")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_run_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sea.csv");
    let metrics = dir.path().join("m.jsonl");
    let out = pensemble(&["gen", "sea", "--n", "4000", "--seed", "3", "--out", s(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x1,x2,x3,class\n"));
    assert_eq!(text.lines().count(), 4001);

    let out = pensemble(&[
        "run",
        "--data",
        s(&csv),
        "--mode",
        "holdout",
        "--stamps",
        "4",
        "--train",
        "500",
        "--test",
        "500",
        "--metrics",
        s(&metrics),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("mode     holdout"));

    let lines: Vec<String> = fs::read_to_string(&metrics)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    // two chunks of 250 per stamp plus the summary
    assert_eq!(lines.len(), 4 * 2 + 1);
    assert!(lines.last().unwrap().contains("\"record\":\"summary\""));
    assert!(!lines.last().unwrap().contains("\"rt\""));
    assert!(dir.path().join("m.jsonl.timing.json").exists());

    let out = pensemble(&["report", "--metrics", s(&metrics)]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("unit chunk"));
    assert!(report.contains("rt "));
    let out = pensemble(&["report", "--metrics", s(&metrics), "--summary"]);
    assert!(!String::from_utf8(out.stdout).unwrap().contains("unit chunk"));
}

#[test]
fn repeated_runs_write_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = pensemble(&[
            "run",
            "--gen",
            "sea",
            "--n",
            "6000",
            "--stamps",
            "6",
            "--seed",
            "11",
            "--metrics",
            s(path),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let metrics = dir.path().join("m.jsonl");
    fs::write(
        &cfg,
        "gen = \"sea\"\nn = 2000\nstamps = 2\nchunk = 100\nmode = \"holdout\"\n",
    )
    .unwrap();
    let out = pensemble(&["run", "--config", s(&cfg), "--chunk", "250", "--metrics", s(&metrics)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let chunks = fs::read_to_string(&metrics)
        .unwrap()
        .lines()
        .filter(|l| l.contains("\"record\":\"chunk\""))
        .count();
    assert_eq!(chunks, 2 * 250 / 250);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pensemble(&["run"]).status.code(), Some(2));
    assert_eq!(
        pensemble(&["run", "--gen", "sea", "--theta", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(pensemble(&["run", "--gen", "sea", "--bogus"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "thetta = 0.5\n").unwrap();
    assert_eq!(pensemble(&["run", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(pensemble(&["run", "--data", s(&missing)]).status.code(), Some(3));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x1,x2,class\n0.1,0.2,1\n0.3,oops,2\n").unwrap();
    assert_eq!(pensemble(&["run", "--data", s(&bad)]).status.code(), Some(3));

    // a stream too short for the requested protocol
    let out = pensemble(&["run", "--gen", "sea", "--n", "1000", "--stamps", "3"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
