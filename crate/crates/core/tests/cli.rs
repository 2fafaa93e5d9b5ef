use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pairlab"))
}

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn bundled_scenarios_exit_zero() {
    let out = tempfile::tempdir().unwrap();
    for file in scenarios() {
        let status = bin().arg("run").arg(&file).arg("--out").arg(out.path()).output().unwrap();
        assert_eq!(status.status.code(), Some(0), "{}: {}", file.display(), String::from_utf8_lossy(&status.stderr));
    }
    assert!(out.path().join("chen_attack.transcript.jsonl").exists());
}

#[test]
fn json_output_parses() {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/chen_attack.json");
    let out = bin().arg("run").arg(file).args(["--format", "json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn violated_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"name": "wrong", "protocol": "chen", "params": {"preset": "desk"},
            "inputs": {"random": {"count": 5}},
            "behaviors": {"u1": {"kind": "rho_substitution", "seed": 1}, "u2": {"kind": "honest"}},
            "expect": "honest_complete"}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name": "bad", "protocol": "chen", "unknown_key": 1}"#).unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let missing = bin().args(["run", "/nonexistent/scenario.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn gen_fixtures_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = bin().args(["gen-fixtures", "--q", "11", "--table-size", "6", "--table-seed", "3", "--out"]).arg(d).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["params.json", "table.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
    let params: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("params.json")).unwrap()).unwrap();
    assert_eq!(params["q"], "11");
    assert_eq!(params["p"], "23");
}

#[test]
fn eavesdrop_subcommand_recovers_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(
        &scenario,
        r#"{"name": "tap", "protocol": "chen", "params": {"preset": "desk"},
            "inputs": {"explicit": [["7", "2"]]}, "expect": "honest_complete"}"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(&scenario).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    bin().args(["gen-fixtures", "--q", "11", "--table-size", "1", "--out"]).arg(dir.path()).output().unwrap();
    let out = bin()
        .arg("eavesdrop")
        .arg(dir.path().join("tap.transcript.jsonl"))
        .arg("--params")
        .arg(dir.path().join("params.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"a":"7","b":"2"}"#);
}
