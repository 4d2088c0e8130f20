//! CLI behavior: exit codes, report writing, and the instance round trip.

use std::path::Path;
use std::process::{Command, Output};

fn asg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_instance(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

const Z12_INTERVALS: &str = r#"{
  "group": { "kind": "cyclic", "n": 12 },
  "family": [[0, 1, 2, 10, 11], [0, 1, 11]]
}"#;

#[test]
fn validate_prints_constants_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", Z12_INTERVALS);
    let out = asg(&["validate", &inst], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "K=2 N=2");
}

#[test]
fn validate_rejects_nonsymmetric_member_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "bad.json",
        r#"{ "group": { "kind": "cyclic", "n": 6 }, "family": [[0, 3], [0, 1]] }"#,
    );
    let out = asg(&["validate", &inst], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("member 1"), "diagnostic names the member: {err}");
}

#[test]
fn malformed_json_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "broken.json", "{ \"group\": ");
    let out = asg(&["validate", &inst], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_a_self_validating_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = write_instance(dir.path(), "inst.json", Z12_INTERVALS);
    let report_path = dir.path().join("report.json");
    let out = asg(
        &["run", &inst_path, "--out", report_path.to_str().unwrap(), "--quiet"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let instance = asg_core::io::read_instance(Path::new(&inst_path)).unwrap();
    let report: asg_core::io::ReportFile =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    asg_core::io::verify_report(&instance, &report).unwrap();
    assert_eq!(report.h, vec![0, 1, 2, 3, 4, 8, 9, 10, 11]);
    assert!(report.timing_ms.is_none());
}

#[test]
fn run_with_oracle_exits_zero_on_match() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", Z12_INTERVALS);
    let out = asg(&["run", &inst, "--oracle", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oversized_family_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let members: Vec<String> = (0..13).map(|_| "[0, 2]".to_string()).collect();
    let contents = format!(
        r#"{{ "group": {{ "kind": "cyclic", "n": 4 }}, "family": [{}] }}"#,
        members.join(", ")
    );
    let inst = write_instance(dir.path(), "big.json", &contents);
    let out = asg(&["run", &inst, "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn exhausted_budget_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", Z12_INTERVALS);
    let out = asg(&["run", &inst, "--quiet", "--budget", "2"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn budget_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", Z12_INTERVALS);
    let out = Command::new(env!("CARGO_BIN_EXE_asg"))
        .args(["run", &inst, "--quiet"])
        .env("ASG_BUDGET", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // explicit flag beats the environment
    let out = Command::new(env!("CARGO_BIN_EXE_asg"))
        .args(["run", &inst, "--quiet", "--budget", "50000000"])
        .env("ASG_BUDGET", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn battery_zero_failures_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = asg(
        &["battery", "--seed", "0", "--trials", "1", "--group-cap", "8", "--quiet"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn battery_fault_injection_exits_three_with_reproducer() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("battery.json");
    let out = asg(
        &[
            "battery",
            "--seed",
            "0",
            "--trials",
            "1",
            "--group-cap",
            "8",
            "--out",
            report_path.to_str().unwrap(),
            "--inject-fault",
            "--quiet",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let repro = dir.path().join("battery.reproducer.json");
    assert!(repro.exists(), "reproducer file is written");
    // the reproducer is itself a parseable instance
    asg_core::io::read_instance(&repro).unwrap();
}

#[test]
fn oracle_command_agrees_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "klein.json",
        r#"{
  "group": { "kind": "product", "factors": [{ "kind": "cyclic", "n": 2 }, { "kind": "cyclic", "n": 2 }] },
  "family": [[0, 1], [0, 2]]
}"#,
    );
    let out = asg(&["oracle", &inst], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all fields agree"));
}

#[test]
fn oracle_command_rejects_oversized_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "big.json",
        r#"{ "group": { "kind": "cyclic", "n": 25 }, "family": [[0]] }"#,
    );
    let out = asg(&["oracle", &inst], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn supplied_automorphisms_are_classified_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    // identity, negation (stabilizes the intervals), and multiplication by 5
    // (an automorphism of Z12 that does not stabilize the family)
    let inst = write_instance(
        dir.path(),
        "inst.json",
        r#"{
  "group": { "kind": "cyclic", "n": 12 },
  "family": [[0, 1, 2, 10, 11], [0, 1, 11]],
  "automorphisms": [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [0, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1],
    [0, 5, 10, 3, 8, 1, 6, 11, 4, 9, 2, 7]
  ]
}"#,
    );
    let report_path = dir.path().join("report.json");
    let out = asg(
        &["run", &inst, "--out", report_path.to_str().unwrap(), "--quiet"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: asg_core::io::ReportFile =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.invariance.len(), 3);
    assert!(report.invariance[0].stabilizes_family);
    assert_eq!(report.invariance[0].fixes_h, Some(true));
    assert!(report.invariance[1].stabilizes_family);
    assert_eq!(report.invariance[1].fixes_h, Some(true));
    assert!(!report.invariance[2].stabilizes_family);
    assert_eq!(report.invariance[2].fixes_h, None);
}

#[test]
fn shipped_instances_parse_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for name in [
        "z12_intervals.json",
        "d4_reflections.json",
        "klein_pair.json",
        "single_subgroup_z6.json",
    ] {
        let path = root.join("instances").join(name);
        let out = asg(&["run", path.to_str().unwrap(), "--quiet"], dir.path());
        assert_eq!(out.status.code(), Some(0), "instance {name} failed");
    }
}
