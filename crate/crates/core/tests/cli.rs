use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn crackwidth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crackwidth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn synth(dir: &Path, extra: &[&str]) -> (String, String) {
    let mask = dir.join("mask.png").to_string_lossy().into_owned();
    let mut args = vec!["synth", "--out", mask.as_str()];
    args.extend_from_slice(extra);
    let out = crackwidth(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = dir.join("mask.csv").to_string_lossy().into_owned();
    assert_eq!(stdout_json(&out)[0]["n_points"], 13);
    (mask, csv)
}

#[test]
fn measure_on_a_horizontal_strip() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, _) = synth(dir.path(), &["--width", "5"]);
    let out = crackwidth(&["measure", "--mask", &mask, "--point", "40,80"]);
    assert!(out.status.success());
    let m = &stdout_json(&out)[0];
    assert_eq!(m["method"], "pca");
    assert_eq!(m["width_px"], 5);
    assert!(m.get("elapsed_pca_ms").is_none());

    let out = crackwidth(&[
        "measure",
        "--mask",
        &mask,
        "--point",
        "40,80",
        "--timings",
        "--scale-mm-per-px",
        "0.5",
    ]);
    let m = &stdout_json(&out)[0];
    assert!(m["elapsed_pca_ms"].is_number());
    assert_eq!(m["width_mm"], 2.5);
}

#[test]
fn background_point_exits_with_point_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, _) = synth(dir.path(), &[]);
    let out = crackwidth(&["measure", "--mask", &mask, "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    let line = &stdout_json(&out)[0];
    assert!(
        line["error"]
            .as_str()
            .unwrap()
            .contains("not a crack pixel"),
        "{line}"
    );
}

#[test]
fn synth_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, csv) = synth(
        dir.path(),
        &[
            "--width", "7", "--angle", "35", "--jitter", "1", "--seed", "3",
        ],
    );
    let out = crackwidth(&["eval", "--mask", &mask, "--points", &csv]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = &stdout_json(&out)[0];
    assert_eq!(report["n_points"], 13);
    assert!(report["mae"].as_f64().unwrap() <= 1.0, "{report}");
    assert_eq!(report["errors"].as_array().unwrap().len(), 0);
}

#[test]
fn invalid_invocations_exit_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, _) = synth(dir.path(), &[]);
    for args in [
        vec!["measure", "--mask", mask.as_str()],
        vec![
            "measure",
            "--mask",
            mask.as_str(),
            "--point",
            "40,80",
            "--gamma-deg",
            "95",
        ],
        vec![
            "measure",
            "--mask",
            mask.as_str(),
            "--point",
            "40,80",
            "--patch-size",
            "4",
        ],
        vec!["measure", "--mask", mask.as_str(), "--point", "forty"],
        vec!["batch", "--mask", mask.as_str()],
        vec!["eval"],
        vec!["frobnicate"],
    ] {
        let out = crackwidth(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(
            err.to_lowercase().contains("usage") || err.contains("error"),
            "{args:?}: {err}"
        );
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let missing = dir.path().join("nope.png");
    let out = crackwidth(&[
        "measure",
        "--mask",
        missing.to_str().unwrap(),
        "--point",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical_and_jobs_do_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, csv) = synth(
        dir.path(),
        &[
            "--kind", "cross", "--width", "5", "--width2", "9", "--angle", "20", "--canvas",
            "200x200",
        ],
    );
    let run =
        |jobs: &str| crackwidth(&["batch", "--mask", &mask, "--points", &csv, "--jobs", jobs]);
    let a = run("1");
    let b = run("1");
    let c = run("8");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let lines = stdout_json(&a);
    assert_eq!(lines.len(), 13);
    assert!(lines.iter().any(|l| l["method"] == "rpca"));

    let mask2 = dir.path().join("again.png");
    synth_again(&mask2);
    synth_again(&dir.path().join("again2.png"));
    assert_eq!(
        std::fs::read(&mask2).unwrap(),
        std::fs::read(dir.path().join("again2.png")).unwrap()
    );
    assert_eq!(
        std::fs::read(mask2.with_extension("csv")).unwrap(),
        std::fs::read(dir.path().join("again2.csv")).unwrap()
    );
}

fn synth_again(path: &Path) {
    let out = crackwidth(&[
        "synth",
        "--kind",
        "mesh",
        "--jitter",
        "1",
        "--seed",
        "7",
        "--canvas",
        "240x240",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
}

#[test]
fn overlay_writes_an_image() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, csv) = synth(dir.path(), &["--width", "6", "--angle", "30"]);
    let png = dir.path().join("overlay.png");
    let out = crackwidth(&[
        "overlay",
        "--mask",
        &mask,
        "--points",
        &csv,
        "--out",
        png.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let img = image::open(&png).unwrap();
    assert_eq!((img.width(), img.height()), (160, 160));
}

#[test]
fn batch_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let (mask, csv) = synth(dir.path(), &["--width", "9", "--angle", "60"]);
    let out_path = dir.path().join("out.jsonl");
    let out = crackwidth(&[
        "batch",
        "--mask",
        &mask,
        "--points",
        &csv,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn help_exits_cleanly() {
    let out = crackwidth(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["measure", "batch", "eval", "synth", "overlay"] {
        assert!(text.contains(sub));
    }
}
