use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sublab::{parse_scenarios, parse_scenarios_str, run, write_csv, ConfigError, Status, CSV_HEADER, KINDS};

fn suite() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/suite.json")
}

fn sublab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sublab"))
        .args(args)
        .env_remove("SUBLAB_PARALLEL")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

const GNORMAL: &str = r#"[{"id": "pos", "kind": "gnormal", "g": [0.25, 1.0],
  "phi": {"type": "positive_part"}, "expected": 0.3989422804014327}]"#;

#[test]
fn bundled_suite_parses_and_covers_every_kind() {
    let scenarios = parse_scenarios(&suite()).unwrap();
    for (kind, _) in KINDS {
        assert!(scenarios.iter().any(|s| s.kind.name() == kind), "no {kind} scenario");
    }
}

#[test]
fn empty_config_gives_header_only() {
    let reports = run(&parse_scenarios_str("[]").unwrap(), 2).unwrap();
    assert!(reports.is_empty());
    let mut buf = Vec::new();
    write_csv(&reports, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
}

#[test]
fn gnormal_scenario_passes() {
    let reports = run(&parse_scenarios_str(GNORMAL).unwrap(), 1).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].status, Status::Pass);
    let row = &reports[0].rows[0];
    assert!((row.prelimit.unwrap() - 0.3989422804014327).abs() < 2e-3);
}

#[test]
fn narrow_grid_is_an_error_not_a_panic() {
    let cfg = r#"[{"id": "narrow", "kind": "gnormal", "g": [0.25, 1.0], "phi": {"type": "square"},
      "grid": {"half_width": 1.0, "dx": 0.02}}]"#;
    let reports = run(&parse_scenarios_str(cfg).unwrap(), 1).unwrap();
    assert_eq!(reports[0].status, Status::Error);
    let msg = reports[0].message.as_deref().unwrap_or("");
    assert!(msg.contains("domain"), "message was {msg:?}");
}

#[test]
fn one_failure_does_not_stop_the_batch() {
    let cfg = r#"[
      {"id": "bad", "kind": "gnormal", "g": [0.25, 1.0], "phi": {"type": "square"},
       "grid": {"half_width": 1.0, "dx": 0.02}},
      {"id": "off", "kind": "gnormal", "g": [0.25, 1.0], "phi": {"type": "positive_part"},
       "expected": 0.5, "tolerance": 0.001},
      {"id": "good", "kind": "gnormal", "g": [0.25, 1.0], "phi": {"type": "positive_part"},
       "expected": 0.3989422804014327}
    ]"#;
    let reports = run(&parse_scenarios_str(cfg).unwrap(), 3).unwrap();
    let status: Vec<Status> = reports.iter().map(|r| r.status).collect();
    assert_eq!(status, vec![Status::Error, Status::Fail, Status::Pass]);
    let ids: Vec<&str> = reports.iter().map(|r| r.scenario_id.as_str()).collect();
    assert_eq!(ids, vec!["bad", "off", "good"]);
}

#[test]
fn config_errors() {
    assert!(matches!(parse_scenarios(Path::new("/no/such/file.json")), Err(ConfigError::NotFound(_))));
    assert!(matches!(parse_scenarios_str("[{\"id\": \"x\",\n \"kind\": }]"), Err(ConfigError::Parse { line: 2, .. })));
    assert!(parse_scenarios_str(r#"[{"id": "x", "kind": "nope"}]"#).is_err());
    let dup = format!("[{},{}]", &GNORMAL[1..GNORMAL.len() - 1], &GNORMAL[1..GNORMAL.len() - 1]);
    assert!(matches!(parse_scenarios_str(&dup), Err(ConfigError::Validation { .. })));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), GNORMAL);
    assert_eq!(sublab(&["run", ok.to_str().unwrap()]).status.code(), Some(0));

    let failing = dir.path().join("fail.json");
    std::fs::write(&failing, GNORMAL.replace("0.3989422804014327", "0.5")).unwrap();
    assert_eq!(sublab(&["run", failing.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(sublab(&["run", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn stdout_csv_and_json_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GNORMAL);
    let out = sublab(&["run", cfg.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert!(lines[1].starts_with("pos,gnormal,pass,"));

    let out_dir = dir.path().join("out");
    let o = sublab(&["run", cfg.to_str().unwrap(), "--format", "json", "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(v[0]["scenario_id"], "pos");
    assert!(v[0]["provenance"]["wall_time_ms"].is_number());
}

#[test]
fn list_kinds_names_every_kind() {
    let out = sublab(&["list-kinds"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for k in ["gnormal", "clt", "fclt", "rosenthal", "exponential", "counterexample", "levy", "axioms"] {
        assert!(text.lines().any(|l| l.starts_with(k)), "{k} missing");
    }
}

#[test]
fn parallel_env_matches_serial() {
    let cfg = r#"[
      {"id": "r", "kind": "rosenthal", "variant": "max_sq", "count": 20, "seed": 3},
      {"id": "e", "kind": "exponential", "count": 20, "seed": 4},
      {"id": "g", "kind": "gnormal", "g": [0.0, 1.0], "phi": {"type": "abs"}}
    ]"#;
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), cfg);
    let serial = sublab(&["run", path.to_str().unwrap()]);
    let parallel = Command::new(env!("CARGO_BIN_EXE_sublab"))
        .args(["run", path.to_str().unwrap()])
        .env("SUBLAB_PARALLEL", "3")
        .output()
        .unwrap();
    assert!(serial.status.success(), "{}", String::from_utf8_lossy(&serial.stderr));
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn seed_flag_changes_randomized_rows() {
    let cfg = r#"[{"id": "e", "kind": "exponential", "count": 10, "seed": 4}]"#;
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), cfg);
    let a = sublab(&["run", path.to_str().unwrap(), "--seed", "99"]);
    let b = sublab(&["run", path.to_str().unwrap(), "--seed", "99"]);
    let c = sublab(&["run", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains(",99\n"));
    assert_ne!(a.stdout, c.stdout);
}
