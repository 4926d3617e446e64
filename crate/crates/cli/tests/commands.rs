use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fedshare::reference::{reference_scenario, ReferenceExpectations};
use fedshare::protocol::PhaseTag;
use fedshare::scenario::Scenario;
use fedshare::simnet::{Dropout, FaultKind, MaliciousCloud};
use fedshare::CloudId;
use fedshare_cli::{cmd_verify_reference, EXIT_CONFIG, EXIT_FAILURE, EXIT_FLAGGED, EXIT_OK, EXIT_UNRECOVERABLE};
use serde_json::Value;
use tempfile::TempDir;

fn fedshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedshare"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_scenario(dir: &Path, name: &str, scenario: &Scenario) -> String {
    let path = dir.join(name);
    fs::write(&path, scenario.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(dir: &Path, scenario: &str, out: &str, seed: Option<&str>) -> Output {
    let out_dir = dir.join(out);
    let mut args = vec!["run", "--scenario", scenario, "--out", out_dir.to_str().unwrap()];
    if let Some(s) = seed {
        args.extend(["--seed", s]);
    }
    fedshare(&args)
}

fn report(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("report.json")).unwrap()).unwrap()
}

fn corrupt(cloud: u32) -> MaliciousCloud {
    MaliciousCloud {
        cloud: CloudId(cloud),
        fault: FaultKind::CorruptSum {
            coefficient_index: 1,
            delta: 1,
        },
    }
}

#[test]
fn example_scenario_exits_zero_with_aggregate() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(dir.path(), "example.json", &reference_scenario());
    let out = run(dir.path(), &path, "out", None);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", stdout(&out));
    let r = report(dir.path(), "out");
    assert_eq!(r["aggregate"], "20");
    assert_eq!(r["case_tag"], "AllHonest");
    for key in ["flagged_clouds", "verification", "keys", "seed", "scenario"] {
        assert!(r.get(key).is_some(), "report lacks {key}");
    }
    let verification = r["verification"].as_array().unwrap();
    assert_eq!(verification.len(), 4);
    assert!(verification.iter().all(|v| v["verdicts"].as_array().unwrap().len() == 3));
    assert!(dir.path().join("out/transcript.json").exists());
}

#[test]
fn two_of_four_malicious_is_unrecoverable() {
    let dir = TempDir::new().unwrap();
    let mut scenario = reference_scenario();
    scenario.faults.malicious = vec![corrupt(1), corrupt(2)];
    let path = write_scenario(dir.path(), "bad.json", &scenario);
    let out = run(dir.path(), &path, "out", None);
    assert_eq!(out.status.code(), Some(EXIT_UNRECOVERABLE), "{}", stdout(&out));
    assert_eq!(report(dir.path(), "out")["aggregate"], Value::Null);
}

#[test]
fn one_flagged_cloud_exits_three() {
    let dir = TempDir::new().unwrap();
    let mut scenario = reference_scenario();
    scenario.faults.malicious = vec![corrupt(3)];
    let path = write_scenario(dir.path(), "one.json", &scenario);
    let out = run(dir.path(), &path, "out", None);
    assert_eq!(out.status.code(), Some(EXIT_FLAGGED), "{}", stdout(&out));
    let r = report(dir.path(), "out");
    assert_eq!(r["flagged_clouds"], serde_json::json!(["C3"]));
    assert_eq!(r["aggregate"], "20");
}

#[test]
fn dropout_recovers_missing_share() {
    let dir = TempDir::new().unwrap();
    let mut scenario = reference_scenario();
    scenario.faults.dropouts = vec![Dropout {
        cloud: CloudId(4),
        phase: PhaseTag::Recovery,
    }];
    let path = write_scenario(dir.path(), "drop.json", &scenario);
    let out = run(dir.path(), &path, "out", None);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", stdout(&out));
    let r = report(dir.path(), "out");
    assert_eq!(r["case_tag"], "MissingShareRecovered");
    assert_eq!(r["partial_aggregate"], "12");
    assert_eq!(r["missing_contribution"], "8");
}

#[test]
fn oversized_secret_names_the_field() {
    let dir = TempDir::new().unwrap();
    let mut scenario = reference_scenario();
    scenario.clouds[1].secret = 8654;
    let path = write_scenario(dir.path(), "big.json", &scenario);
    let out = run(dir.path(), &path, "out", None);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(stdout(&out).contains("clouds[1].secret"), "{}", stdout(&out));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_and_malformed_fields_are_rejected() {
    let dir = TempDir::new().unwrap();
    let mut json: Value = serde_json::from_str(&reference_scenario().to_json()).unwrap();
    json["colour"] = "blue".into();
    let path = dir.path().join("extra.json");
    fs::write(&path, json.to_string()).unwrap();
    let out = run(dir.path(), path.to_str().unwrap(), "out", None);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(stdout(&out).contains("colour"), "{}", stdout(&out));

    let mut json: Value = serde_json::from_str(&reference_scenario().to_json()).unwrap();
    json["clouds"][2]["fixed_cp"] = "4328".into();
    fs::write(&path, json.to_string()).unwrap();
    let out = run(dir.path(), path.to_str().unwrap(), "out", None);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(stdout(&out).contains("clouds[2].fixed_cp"), "{}", stdout(&out));

    let out = run(dir.path(), "/nonexistent/scenario.json", "out", None);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn report_replays_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let mut scenario = reference_scenario();
    scenario.faults.malicious = vec![corrupt(2)];
    let path = write_scenario(dir.path(), "s.json", &scenario);
    let first = run(dir.path(), &path, "first", Some("77"));
    assert_eq!(first.status.code(), Some(EXIT_FLAGGED));

    let r = report(dir.path(), "first");
    assert_eq!(r["seed"], "77");
    let replay = dir.path().join("replay.json");
    fs::write(&replay, r["scenario"].to_string()).unwrap();
    let second = run(dir.path(), replay.to_str().unwrap(), "second", None);
    assert_eq!(second.status.code(), Some(EXIT_FLAGGED));

    for file in ["transcript.json", "report.json"] {
        let a = fs::read(dir.path().join("first").join(file)).unwrap();
        let b = fs::read(dir.path().join("second").join(file)).unwrap();
        assert!(a == b, "{file} differs on replay");
    }
}

#[test]
fn verify_command_passes_and_prints_table() {
    let out = fedshare(&["verify-paper"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = stdout(&out);
    assert_eq!(text.matches("[ok  ]").count(), 4, "{text}");
    for np in ["8654", "11338", "12406", "11686"] {
        assert!(text.contains(np), "{text}");
    }
    assert!(text.contains("primitive"));
}

#[test]
fn tampered_example_fails() {
    let mut tampered = reference_scenario();
    tampered.clouds[0].secret = 3;
    let mut out = Vec::new();
    assert_eq!(cmd_verify_reference(&tampered, &ReferenceExpectations::default(), &mut out), EXIT_FAILURE);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("[FAIL] case 1 aggregate: got 21, expected 20"), "{text}");
    assert!(text.contains("primitive"));
}

#[test]
fn keygen_prints_injected_primes() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(dir.path(), "k.json", &reference_scenario());
    let out = fedshare(&["keygen", "--scenario", &path]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = stdout(&out);
    for cp in ["4327", "5669", "6203", "5843"] {
        assert!(text.contains(cp), "{text}");
    }
}
