use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pas"))
        .args(args)
        .current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."))
        .output()
        .expect("spawn pas")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = pas(args);
    assert!(
        out.status.success(),
        "pas {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn optimize_input_json_has_normalized_pmf() {
    let text = stdout_ok(&["optimize-input", "--m", "2", "--snr-db", "5"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let probs: Vec<f64> = serde_json::from_value(v["probs"].clone()).unwrap();
    assert_eq!(probs.len(), 4);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(v["mi"].as_f64().unwrap() > 0.9);
}

#[test]
fn match_then_dematch_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let comp = dir.path().join("comp.json");
    let text = stdout_ok(&["compose", "--n", "10", "--probs", "0.5,0.3,0.15,0.05"]);
    std::fs::write(&comp, &text).unwrap();
    let k = serde_json::from_str::<Value>(&text).unwrap()["k"].as_u64().unwrap() as usize;

    let bits: String = (0..k).map(|i| if i % 3 == 0 { '1' } else { '0' }).collect();
    let bits_file = dir.path().join("bits.txt");
    std::fs::write(&bits_file, &bits).unwrap();
    let comp_arg = comp.to_str().unwrap();
    let amps = stdout_ok(&["match", "--composition", comp_arg, "--input", bits_file.to_str().unwrap()]);
    assert_eq!(amps.split_whitespace().count(), 10);

    let amps_file = dir.path().join("amps.txt");
    std::fs::write(&amps_file, &amps).unwrap();
    let back = stdout_ok(&["dematch", "--composition", comp_arg, "--input", amps_file.to_str().unwrap()]);
    assert_eq!(back.trim(), bits);
}

#[test]
fn decode_corrects_a_single_error() {
    let dir = tempfile::tempdir().unwrap();
    let llrs = dir.path().join("llrs.txt");
    std::fs::write(&llrs, "-3 4 4 4 4 4 4\n").unwrap();
    let text = stdout_ok(&["decode", "--alist", "builtin:hamming_7_4", "--input", llrs.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["bits"], serde_json::json!([0, 0, 0, 0, 0, 0, 0]));
}

#[test]
fn simulate_accepts_float_frame_counts() {
    let text = stdout_ok(&[
        "simulate",
        "--mode",
        "modes/pas_4ask_r2_3.toml",
        "--snr-db",
        "20",
        "--seed",
        "7",
        "--max-frames",
        "2e1",
    ]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["frames"], 20);
    assert_eq!(v["errors"], 0);
    assert!(v["fer_upper_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_writes_table_columns() {
    let text = stdout_ok(&[
        "sweep",
        "--mode",
        "modes/pas_4ask_r2_3.toml",
        "--snr-db",
        "6,20",
        "--max-frames",
        "10",
    ]);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("Rate,SNR [dB],Gap [dB],FER,95% CI"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn plan_rate_derives_reference_when_amplitudes_are_absent() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.json");
    std::fs::write(&reference, r#"{"m": 3, "gamma": 0.0, "rate": 1.75, "snr_db": 11.0}"#).unwrap();
    let text = stdout_ok(&["plan-rate", "--reference", reference.to_str().unwrap(), "--rate", "1.5,2.0"]);
    let v: Vec<Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(v.len(), 2);
    let snr: Vec<f64> = v.iter().map(|p| p["snr_db"].as_f64().unwrap()).collect();
    assert!(snr[0] < 11.0 && 11.0 < snr[1], "{snr:?}");
}

#[test]
fn gen_code_emits_alist() {
    let text = stdout_ok(&["gen-code", "--n", "24", "--checks", "12"]);
    let header: Vec<usize> = text
        .lines()
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(header, vec![24, 12]);
}

#[test]
fn frame_dump_is_rejected_for_uniform_modes() {
    let out = pas(&["frame", "--mode", "modes/uniform_8ask_r7_12.toml"]);
    assert!(!out.status.success());
}

#[test]
fn bad_table_name_is_a_usage_error() {
    let out = pas(&["tables", "--table", "nope"]);
    assert!(!out.status.success());
}
