use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn defonet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defonet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BEAMS: &str = "\
# small bridge family
family = beam
grid = 16
pitch = 0.09
spans = 0.8, 1.0, 1.2
";

#[test]
fn generate_train_predict_assess_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("beams.conf");
    fs::write(&conf, BEAMS).unwrap();
    let data = dir.path().join("beams.bin");
    let ckpt = dir.path().join("model.ckpt");
    let report = dir.path().join("report.jsonl");

    let g = json(&defonet(&["generate", "--config", s(&conf), "--out", s(&data), "--seed", "1"]));
    assert_eq!(g["samples"], 12);
    assert_eq!(g["resolution"], 16);

    let t = json(&defonet(&[
        "train", "--data", s(&data), "--grid", "16", "--alpha", "0.85", "--beta", "0.8", "--epochs", "2", "--seed",
        "3", "--out", s(&ckpt),
    ]));
    assert_eq!(t["steps"], 4);
    let log = fs::read_to_string(dir.path().join("model.ckpt.log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 4);

    let p = defonet(&[
        "predict", "--ckpt", s(&ckpt), "--scene", s(&conf), "--force", "1", "--loc", "3", "--material", "wood",
        "--threshold", "0.5", "--out", s(&report),
    ]);
    assert!(p.status.success(), "{}", String::from_utf8_lossy(&p.stderr));
    let first = fs::read(&report).unwrap();
    for suffix in [".voxg", ".png", ".timing.json"] {
        assert!(dir.path().join(format!("report.jsonl{suffix}")).exists(), "{suffix}");
    }
    let rec: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(rec["resolution"], 16);
    assert_eq!(rec["condition"]["material_bin"], 0);

    // same checkpoint, same request -> byte-identical report
    defonet(&[
        "predict", "--ckpt", s(&ckpt), "--scene", s(&conf), "--force", "1", "--loc", "3", "--material", "wood",
        "--out", s(&report),
    ]);
    assert_eq!(fs::read(&report).unwrap(), first);

    let v = json(&defonet(&["assess", "--report", s(&report), "--clearance", "0.015"]));
    let peak = rec["max_deflection_m"].as_f64().unwrap();
    assert_eq!(v["safe"].as_bool().unwrap(), peak < 0.015);

    let eval_dir = dir.path().join("eval");
    defonet(&["evaluate", "--ckpt", "oracle", "--data", s(&data), "--mode", "table", "--out-dir", s(&eval_dir)]);
    let table = fs::read_to_string(eval_dir.join("table.jsonl")).unwrap();
    for line in table.lines() {
        let row: Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["kind"], "table");
        assert_eq!(row["rmse_cm"], 0.0);
    }
    assert!(eval_dir.join("table.png").exists());

    defonet(&["evaluate", "--ckpt", s(&ckpt), "--data", s(&data), "--mode", "holdout", "--out-dir", s(&eval_dir)]);
    let rows = fs::read_to_string(eval_dir.join("holdout.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 12);
}

#[test]
fn generate_is_byte_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("beams.conf");
    fs::write(&conf, format!("{BEAMS}count = 6\n")).unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        json(&defonet(&["generate", "--config", s(&conf), "--out", s(&out), "--seed", seed]));
        fs::read(out).unwrap()
    };
    let a = run("a.bin", "5");
    assert_eq!(a, run("b.bin", "5"));
    assert_ne!(a, run("c.bin", "6"));
}

#[test]
fn mismatched_grid_is_reported_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("beams.conf");
    fs::write(&conf, BEAMS).unwrap();
    let data = dir.path().join("beams.bin");
    json(&defonet(&["generate", "--config", s(&conf), "--out", s(&data), "--seed", "1"]));
    let ckpt = dir.path().join("model.ckpt");
    let out = defonet(&[
        "train", "--data", s(&data), "--grid", "32", "--alpha", "0.85", "--beta", "0.8", "--epochs", "1", "--seed",
        "0", "--out", s(&ckpt),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution mismatch"));
    assert!(!ckpt.exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "family = beam\nspam = 1\n").unwrap();
    let out = defonet(&["generate", "--config", s(&conf), "--out", s(&dir.path().join("x.bin")), "--seed", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spam"));
}
