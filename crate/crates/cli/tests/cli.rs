use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn aklt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aklt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn mat(rows: &[[f64; 3]]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(|&x| json!([x, 0.0])).collect()))
            .collect(),
    )
}

fn identity3() -> Value {
    mat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
}

fn sz() -> Value {
    mat(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
}

fn csv_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find(|l| l.starts_with(&format!("{key},")))
        .and_then(|l| l.split(",").find(|f| !f.is_empty() && *f != key))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn expect_identity_is_normalized() {
    let dir = TempDir::new().unwrap();
    let obs = json!({"n_sites": 3, "factors": [identity3(), identity3(), identity3()]});
    let path = write(&dir, "id.json", &obs.to_string());
    let o = aklt(&["expect", "--input", &path]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(csv_value(&text, "infinite_volume"), 1.0);
    for dev in [
        "deviation_finite_chain_exact_oracle",
        "deviation_finite_chain_infinite_volume",
        "deviation_exact_oracle_infinite_volume",
    ] {
        assert!(csv_value(&text, dev) < 1e-10);
    }
}

#[test]
fn expect_szsz_infinite_volume() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "zz.json", &json!({"n_sites": 2, "factors": [sz(), sz()]}).to_string());
    let o = aklt(&["expect", "--input", &path, "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let inf = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["path"] == "infinite_volume")
        .unwrap();
    assert!((inf["value_re"].as_f64().unwrap() + 4.0 / 9.0).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.json", "{\"n_sites\": 2, \"factors\": [");
    let o = aklt(&["expect", "--input", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = aklt(&["expect", "--input", &dir.path().join("missing.json").to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_exits_3() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "short.json", &json!({"n_sites": 3, "factors": [sz(), sz()]}).to_string());
    assert_eq!(aklt(&["expect", "--input", &path]).status.code(), Some(3));
    let two = json!({"n_sites": 1, "factors": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]});
    let path = write(&dir, "qubit.json", &two.to_string());
    assert_eq!(aklt(&["expect", "--input", &path]).status.code(), Some(3));
}

#[test]
fn correlate_ratios_and_symmetry() {
    let z = stdout(&aklt(&["correlate", "--max-distance", "5", "--axis", "z"]));
    let x = stdout(&aklt(&["correlate", "--max-distance", "5", "--axis", "x"]));
    let rows = |t: &str| -> Vec<Vec<String>> {
        t.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
    };
    let (rz, rx) = (rows(&z), rows(&x));
    assert_eq!(rz.len(), 5);
    for (a, b) in rz.iter().zip(&rx) {
        let (va, vb): (f64, f64) = (a[1].parse().unwrap(), b[1].parse().unwrap());
        assert!((va - vb).abs() < 1e-10);
    }
    for r in &rz[1..] {
        let ratio: f64 = r[2].parse().unwrap();
        assert!((ratio + 1.0 / 3.0).abs() < 1e-9);
    }
    assert_eq!(aklt(&["correlate", "--max-distance", "0"]).status.code(), Some(3));
    assert_eq!(aklt(&["correlate", "--max-distance", "21"]).status.code(), Some(3));
}

#[test]
fn converge_columns_and_decay() {
    let o = aklt(&["converge", "--m-max", "10", "--seed", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "m,p,value_re,value_im,abs_error_vs_omega");
    let errs: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 11);
    assert!(errs[10] < errs[0] * 1e-8);

    let o = aklt(&["converge", "--m-max", "2", "--p-max", "4"]);
    let pairs: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(pairs, ["0,0", "1,1", "2,2", "2,3", "2,4"]);
}

#[test]
fn hqmm_verify_passes_and_reports_witness() {
    let o = aklt(&["hqmm-verify", "--n-sites", "3", "--trials", "100", "--seed", "42", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["summary"]["max_deviation"].as_f64().unwrap() < 1e-9);
    assert!(v["summary"]["witness"]["rank_one"]["gap"].as_f64().unwrap() >= 1e-3);
    assert!(v["summary"]["witness"]["isometry"]["gap"].as_f64().unwrap() >= 1e-3);
}

#[test]
fn hqmm_verify_zero_trials_still_searches() {
    let o = aklt(&["hqmm-verify", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.lines().any(|l| l.starts_with("trial,")));
    assert!(csv_value(&text, "witness_gap_rank_one") >= 4.0 / 3.0 - 1e-12);
}

#[test]
fn hqmm_verify_failure_dumps_observable() {
    // The literal Tr initial functional doubles every expectation.
    let mut model = serde_json::to_value(aklt_core::hqmm::HqmmModel::aklt_causal()).unwrap();
    model["initial_state"] = json!("trace");
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "model.json", &model.to_string());
    let o = aklt(&["hqmm-verify", "--input", &path, "--trials", "4", "--n-sites", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"observable\""));
    assert!(err.contains("\"factors\""));
}

#[test]
fn hqmm_verify_range_checks() {
    assert_eq!(aklt(&["hqmm-verify", "--n-sites", "7"]).status.code(), Some(3));
    assert_eq!(aklt(&["hqmm-verify", "--trials", "10001"]).status.code(), Some(3));
    assert_eq!(aklt(&["hqmm-verify", "--tol", "0"]).status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let out = |name: &str| -> Vec<u8> {
        let p = dir.path().join(name);
        let o = aklt(&["hqmm-verify", "--trials", "20", "--seed", "9", "--out", &p.to_string_lossy()]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
        std::fs::read(p).unwrap()
    };
    assert_eq!(out("a.csv"), out("b.csv"));
    let a = stdout(&aklt(&["converge", "--seed", "5", "--m-max", "6", "--format", "json"]));
    let b = stdout(&aklt(&["converge", "--seed", "5", "--m-max", "6", "--format", "json"]));
    assert_eq!(a, b);
}

#[test]
fn spectrum_of_transfer_channel() {
    let o = aklt(&["spectrum", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let re: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| r["re"].as_f64().unwrap()).collect();
    let expected = [1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
    for (a, b) in re.iter().zip(expected) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((v["summary"]["rate"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.01);
}

#[test]
fn validate_recognizes_documents() {
    let dir = TempDir::new().unwrap();
    let flip = json!({"kraus": [[[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]]});
    let path = write(&dir, "flip.json", &flip.to_string());
    let o = aklt(&["validate", "--input", &path]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("unital_deviation,0.0000000000000000e0,ok"));

    let model = serde_json::to_string(&aklt_core::hqmm::HqmmModel::aklt_causal()).unwrap();
    let path = write(&dir, "model.json", &model);
    assert!(aklt(&["validate", "--input", &path]).status.success());

    let mut broken: Value = serde_json::from_str(&model).unwrap();
    broken["hidden"] = json!({"rank_one_trace": 1.0});
    let path = write(&dir, "broken.json", &broken.to_string());
    assert_eq!(aklt(&["validate", "--input", &path]).status.code(), Some(3));

    let path = write(&dir, "other.json", "{\"foo\": 1}");
    assert_eq!(aklt(&["validate", "--input", &path]).status.code(), Some(2));
    assert_eq!(aklt(&["validate"]).status.code(), Some(3));
}

#[test]
fn spectrum_of_non_unital_channel_reports_power_limit_error() {
    let dir = TempDir::new().unwrap();
    let amp = json!({"kraus": [
        [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
        [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    ]});
    let path = write(&dir, "amp.json", &amp.to_string());
    let o = aklt(&["spectrum", "--input", &path, "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["summary"]["power_limit_error"].is_string());
}
