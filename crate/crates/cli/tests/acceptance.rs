//! CLI-facing acceptance checks: the conversation API surface, the
//! replay subcommand, the distractor-neutral oracle runs, and the exit
//! code contract. Each test prints a `[PASS]` line.

use std::path::PathBuf;
use std::process::{Command, Output};

fn cockpit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cockpit"))
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .canonicalize()
        .expect("seed scenarios present")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn criterion_10_conversation_surface_conformance() {
    let output = cockpit()
        .args(["devices", "--api", "conversation"])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let text = stdout_of(&output);

    let expected = [
        "conversation_soundVolume_increase",
        "conversation_soundVolume_decrease",
        "conversation_soundVolume_set",
        "conversation_phone_call",
        "conversation_phone_redial",
        "conversation_phone_answer",
        "conversation_phone_hangup",
        "conversation_message_send",
        "conversation_message_view",
        "conversation_contact_view",
        "conversation_call_miss_view",
        "conversation_call_record_view",
        "conversation_contact_hag_view",
        "conversation_call_handsFree_switch",
        "conversation_contact_delete",
    ];
    assert!(text.starts_with("15 APIs for conversation"), "{text}");
    for name in expected {
        assert!(text.contains(name), "missing {name}");
    }
    // Exactly 15: every listed name is one of the expected.
    let listed = text
        .lines()
        .filter(|l| l.starts_with("conversation_"))
        .count();
    assert_eq!(listed, 15);
    assert!(text.contains("One of: value, degree"));

    // Exclusive value/degree validation: dual supply rejected, each
    // alone accepted.
    use cockpit_core::registry::{validate_args, ApiCall};
    let registry = cockpit_core::devices::builtin_registry();
    let spec = registry
        .search_api("conversation")
        .unwrap()
        .into_iter()
        .find(|s| s.api_name == "conversation_soundVolume_set")
        .unwrap();
    let dual = ApiCall::new("conversation_soundVolume_set")
        .with_arg("value", 40_i64)
        .with_arg("degree", "max");
    assert!(validate_args(&spec, &dual.args).is_err());
    let value_only = ApiCall::new("conversation_soundVolume_set").with_arg("value", 40_i64);
    assert!(validate_args(&spec, &value_only.args).is_ok());
    let degree_only = ApiCall::new("conversation_soundVolume_set").with_arg("degree", "max");
    assert!(validate_args(&spec, &degree_only.args).is_ok());
    let neither = ApiCall::new("conversation_soundVolume_set");
    assert!(validate_args(&spec, &neither.args).is_err());

    println!("[PASS] criterion 10: the conversation device exposes exactly the fifteen documented APIs with value/degree exclusivity");
}

#[test]
fn criterion_06_cli_replay_reports_zero_drift() {
    let store = tempfile::tempdir().unwrap();
    let status = cockpit()
        .arg("validate")
        .arg(scenarios_dir())
        .arg("--store")
        .arg(store.path())
        .status()
        .unwrap();
    assert!(status.success());

    let output = cockpit().arg("replay").arg(store.path()).output().unwrap();
    assert!(output.status.success(), "{}", stdout_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("16 of 16 records replay cleanly"), "{text}");
    assert!(!text.contains("DRIFT"));

    // Tamper with one stored snapshot: replay must flag it and exit 1.
    let record_dir = std::fs::read_dir(store.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(record_dir.join("manifest.json")).unwrap(),
    )
    .unwrap();
    let last = manifest["snapshots"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .as_str()
        .unwrap();
    let path = record_dir.join(last);
    let tampered = std::fs::read_to_string(&path).unwrap().replace(
        "\"value\": true",
        "\"value\": false",
    );
    std::fs::write(&path, tampered).unwrap();

    let output = cockpit().arg("replay").arg(store.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout_of(&output).contains("DRIFT"));

    println!("[PASS] criterion 6 (cli): replay reports zero drift on fresh records and flags tampering");
}

#[test]
fn criterion_09_cli_distractor_neutrality() {
    let base = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for count in ["0", "2", "4", "6"] {
        let out = base.path().join(format!("run_{count}"));
        let status = cockpit()
            .arg("run")
            .arg(scenarios_dir())
            .args(["--agent", "oracle", "--mode", "sfc", "--distractors", count])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));

    // Oracle fixpoint holds at the CLI level too.
    let parsed: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(parsed["overall"]["accuracy"], serde_json::json!(1.0));
    assert_eq!(parsed["overall"]["f1_positive"], serde_json::json!(1.0));
    assert_eq!(parsed["overall"]["f1_negative"], serde_json::json!(1.0));
    println!("[PASS] criterion 9 (cli): oracle report files byte-identical across --distractors 0/2/4/6");
}

#[test]
fn devices_listing_has_twelve_entries() {
    let output = cockpit().arg("devices").output().unwrap();
    assert!(output.status.success());
    let lines = stdout_of(&output).lines().count();
    assert_eq!(lines, 12);
    println!("[PASS] devices lists the twelve builtin device ids");
}

#[test]
fn exit_code_contract() {
    // 0: success.
    let status = cockpit().arg("validate").arg(scenarios_dir()).status().unwrap();
    assert_eq!(status.code(), Some(0));

    // 1: validation failure (a malformed scenario file).
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("broken.scn"),
        "<scenario id=\"broken\"><query>do nothing</query></scenario>",
    )
    .unwrap();
    let output = cockpit().arg("validate").arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout_of(&output).contains("broken.scn"));

    // 2: usage errors.
    let empty = tempfile::tempdir().unwrap();
    let status = cockpit().arg("validate").arg(empty.path()).status().unwrap();
    assert_eq!(status.code(), Some(2), "empty glob is a usage error");

    let status = cockpit().args(["devices", "--api", "nosuch"]).status().unwrap();
    assert_eq!(status.code(), Some(2), "unknown device is a usage error");

    let status = cockpit()
        .arg("run")
        .arg(scenarios_dir())
        .args(["--mode", "hybrid"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "endpoint agent without config is a config error");

    let status = cockpit()
        .arg("run")
        .arg(scenarios_dir())
        .args(["--agent", "oracle", "--distractors", "3"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "distractor count outside {{0,2,4,6}}");

    // Clap's own usage errors also exit 2.
    let status = cockpit().args(["run", "--mode", "warp"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    println!("[PASS] exit-code contract: 0 success, 1 failure, 2 usage/config");
}

#[test]
fn run_outputs_land_in_out_dir_only() {
    let out = tempfile::tempdir().unwrap();
    let cwd = tempfile::tempdir().unwrap();
    let status = cockpit()
        .current_dir(cwd.path())
        .arg("run")
        .arg(scenarios_dir())
        .args(["--agent", "null", "--mode", "fc"])
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.path().join("report.json").exists());
    assert!(out.path().join("report.txt").exists());
    assert!(out.path().join("scenarios").join("cc_ss_lock_doors.json").exists());
    assert!(out.path().join("transcripts").join("cc_ss_lock_doors.txt").exists());
    // Nothing written to the working directory.
    assert_eq!(std::fs::read_dir(cwd.path()).unwrap().count(), 0);
    println!("[PASS] run writes outputs under --out only");
}

#[test]
fn custom_device_file_extends_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let definition = serde_json::json!({
        "device_id": "fogLight",
        "description": "Front fog light",
        "domain": "Light",
        "attributes": [
            {"name": "is_on", "type": "boolean", "default": false, "description": "Power state"}
        ],
        "apis": [{
            "api_name": "fogLight_power_switch",
            "device_id": "fogLight",
            "description": "Switch the fog light",
            "params": [{"name": "switch", "kind": "boolean", "required": true}],
            "effects": [{"op": "set_attr", "attr": "is_on", "value": {"source": "arg", "arg": "switch"}}]
        }]
    });
    let file = dir.path().join("fog_light.json");
    std::fs::write(&file, definition.to_string()).unwrap();

    let output = cockpit()
        .arg("devices")
        .arg("--device-file")
        .arg(&file)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout_of(&output).contains("fogLight"));

    // A scenario against the custom device runs end to end.
    let scenario = dir.path().join("fog.scn");
    std::fs::write(
        &scenario,
        "<scenario id=\"fog\" domain=\"Light\">\n<query>fog lights on</query>\n<api_call>fogLight_power_switch(switch=true)</api_call>\n</scenario>\n",
    )
    .unwrap();
    let status = cockpit()
        .arg("validate")
        .arg(&scenario)
        .arg("--device-file")
        .arg(&file)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    println!("[PASS] device definition files extend the registry without code changes");
}
