use std::path::Path;
use std::process::{Command, Output};

fn hfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_prints_amplitudes_and_exact_hfcs() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("oh.state");
    let o = hfc(&["simulate", "--molecule", "oh", "--exact", "--dump", arg(&dump)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("|110100>  +0.993734"), "{text}");
    assert!(text.contains("total -92.3"), "{text}");
    assert!(text.contains("total -83.1"), "{text}");
    let state = hfc_core::statevector::StateVector::parse_dump(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(state.n_qubits(), 6);
}

#[test]
fn emulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    let out = runs.join("no.json");
    let o = hfc(&[
        "emulate", "--molecule", "no", "--pipeline", "em+ps", "--runs", "2", "--noise", "torino-like", "--seed", "3",
        "--shots", "2000", "--calibration-shots", "2000", "--out", arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("no em+ps: 2/2 runs accepted"), "{}", stdout(&o));

    let noise = dir.path().join("noise.json");
    std::fs::write(&noise, r#"{"p_read_01": 0.01, "p_read_10": 0.02, "p_dep1": 0.0, "p_dep2": 0.001, "over_rot": 0.0}"#).unwrap();
    let o = hfc(&[
        "emulate", "--molecule", "oh", "--pipeline", "raw", "--runs", "1", "--noise", arg(&noise), "--shots", "500",
        "--out", arg(&runs.join("oh.json")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let rep = dir.path().join("report");
    let o = hfc(&["report", "--in", arg(&runs), "--out", arg(&rep)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(rep.join("summary.csv")).unwrap();
    assert_eq!(table.lines().count(), 5, "{table}");
    let first = std::fs::read_to_string(rep.join("hfc.csv")).unwrap();
    hfc(&["report", "--in", arg(&runs), "--out", arg(&rep)]);
    assert_eq!(std::fs::read_to_string(rep.join("hfc.csv")).unwrap(), first);
}

#[test]
fn shot_noise_prints_one_row_per_nucleus() {
    let o = hfc(&["shot-noise", "--molecule", "no", "--reps", "20", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("  O: mean") && text.contains("  N: mean"), "{text}");
}

#[test]
fn all_rejected_exits_with_two_and_keeps_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rejected.json");
    let o = hfc(&[
        "emulate", "--molecule", "oh", "--pipeline", "raw", "--runs", "2", "--noise", "ideal", "--shots", "100",
        "--epsilon", "-0.5", "--out", arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(saved["records"].as_array().unwrap().len(), 2);
    assert!(saved["summary"].is_null());
}

#[test]
fn failed_self_check_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let ds = hfc_core::workbench::MoleculeDataset::load("oh").unwrap();
    let mut value = serde_json::to_value(&ds).unwrap();
    let p = value["circuit"]["params"][0].as_f64().unwrap();
    value["circuit"]["params"][0] = serde_json::json!(p + 0.05);
    let path = dir.path().join("broken.json");
    std::fs::write(&path, value.to_string()).unwrap();
    let o = hfc(&["simulate", "--dataset", arg(&path)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("self-check failed"));
}

#[test]
fn bad_arguments_fail_with_one() {
    let o = hfc(&["emulate", "--molecule", "oh", "--noise", "no-such-preset", "--runs", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hfc(&["simulate", "--molecule", "h2o"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hfc(&["emulate", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(hfc(&["--help"]).status.success());
}
