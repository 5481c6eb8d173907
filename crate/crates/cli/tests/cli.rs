use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vgsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vgsynth"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn vrp_writes_k_sequences_per_window() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("prices.csv");
    let mut text = String::from("date,ticker,close\n");
    let start = chrono_free_dates(40);
    for (i, d) in start.iter().enumerate() {
        text.push_str(&format!("{d},AAA,{}\n", 100.0 + (i as f64 * 0.7).sin() * 5.0));
    }
    fs::write(&csv, text).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "window = 20\nstride = 20\nmethods = [\"vrp\"]\n[downsample]\nk = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = vgsynth(&["generate", "--config", s(&cfg), "--input", s(&csv), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(line_count(&out.join("windows.jsonl")), 2);
    assert_eq!(line_count(&out.join("generated_vrp.jsonl")), 6);
    assert_eq!(line_count(&out.join("runtime.jsonl")), 1);
    assert!(out.join("config.toml").exists());
}

/// `2020-01-01`, `2020-01-02`, ... without a date library.
fn chrono_free_dates(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("2020-{:02}-{:02}", 1 + i / 28, 1 + i % 28)).collect()
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "runtime.jsonl")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn pipeline_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("prices.csv");
    let o = vgsynth(&["corpus", "--tickers", "4", "--days", "240", "--output", s(&csv)]);
    assert!(o.status.success());
    let out = dir.path().join("out");
    let run = |workers: &str| {
        for cmd in ["generate", "evaluate"] {
            let o = vgsynth(&[cmd, "--input", s(&csv), "--out", s(&out), "--seed", "11", "--workers", workers]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        snapshot(&out)
    };
    let first = run("2");
    let second = run("2");
    assert!(first.iter().any(|(n, _)| n == "eval_report.json"));
    assert!(first.iter().any(|(n, _)| n == "embedding_nvmg.csv"));
    assert_eq!(first, second);

    let report = fs::read_to_string(out.join("eval_report.json")).unwrap();
    assert_eq!(report.matches("\"auc_real\"").count(), 4);

    let o = vgsynth(&["report", "--out", s(&out)]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("nvmg") && stdout.contains("segment"), "{stdout}");
    let text = fs::read_to_string(out.join("eval_report.json")).unwrap();
    assert!(text.contains("\"runtime_totals\": {\n    \"hvg\""), "{text}");
}

#[test]
fn unknown_method_is_a_config_error() {
    let o = vgsynth(&["generate", "--methods", "nvg,timegan"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("timegan") && err.contains("nvg, hvg, nvmg, vrp"), "{err}");
}

#[test]
fn unsupported_window_is_rejected() {
    let o = vgsynth(&["generate", "--window", "30"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_generated_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("windows.jsonl"), "").unwrap();
    let o = vgsynth(&["evaluate", "--out", s(dir.path()), "--methods", "hvg"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("generated_hvg.jsonl"), "{err}");
}

#[test]
fn selftest_passes() {
    let o = vgsynth(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("overall: PASS"));
    for suite in ["nvg", "hvg", "dtw", "auc"] {
        assert!(stdout.contains(suite));
    }
}
