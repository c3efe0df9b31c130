use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polyarrow"));
    c.env_remove("POLYARROW_DIM_CAP");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn build_state(dir: &Path) {
    assert!(run(dir, &["space", "l1", "--dim", "1", "--out", "seed.json"]).status.success());
    assert!(run(dir, &["catalog", "gen", "--out", "cat.json"]).status.success());
    let out = run(dir, &["engine", "run", "--seed-space", "seed.json", "--catalog", "cat.json", "--steps", "3", "--out", "st"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn has_float(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Number(n) => n.is_f64(),
        serde_json::Value::Array(a) => a.iter().any(has_float),
        serde_json::Value::Object(o) => o.values().any(has_float),
        _ => false,
    }
}

#[test]
fn engine_run_export_and_audit() {
    let dir = workdir("audit");
    build_state(&dir);
    for file in ["state.json", "composites.json"] {
        let text = fs::read_to_string(dir.join("st").join(file)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(!has_float(&value), "{file} has a float");
    }
    assert!(run(&dir, &["export", "--state", "st", "--object", "ledger/0/arrow", "--out", "probe.json"]).status.success());
    assert!(run(&dir, &["export", "--state", "st", "--object", "catalog/entries/0/arrow", "--out", "target.json"]).status.success());
    let audit = |out: &str| run(&dir, &["engine", "audit", "--state", "st", "--target", "target.json", "--probe", "probe.json", "--eps", "1/8", "--out", out]);
    assert_eq!(audit("a.json").status.code(), Some(0));
    assert_eq!(audit("b.json").status.code(), Some(0));
    assert_eq!(fs::read(dir.join("a.json")).unwrap(), fs::read(dir.join("b.json")).unwrap());
}

#[test]
fn exported_objects_round_trip() {
    let dir = workdir("export");
    build_state(&dir);
    let whole = run(&dir, &["export", "--state", "st", "--object", "state"]);
    assert!(whole.status.success());
    assert_eq!(whole.stdout, fs::read(dir.join("st/state.json")).unwrap());
    let stage = run(&dir, &["export", "--state", "st", "--object", "stages/1", "--out", "s1.json"]);
    assert!(stage.status.success());
    let again = run(&dir, &["space", "from-json", "s1.json"]);
    assert!(again.status.success());
    assert_eq!(again.stdout, fs::read(dir.join("s1.json")).unwrap());
    assert_eq!(run(&dir, &["export", "--state", "st", "--object", "stages/99"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = workdir("codes");
    assert_eq!(run(&dir, &["verify", "nonsense", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["verify", "isom", "--instances", "3"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["verify", "isom", "--instances", "3", "--seed", "1"]).status.code(), Some(0));
    assert_eq!(run(&dir, &["verify", "norming", "--seed", "3"]).status.code(), Some(0));
    let capped = bin().current_dir(&dir).env("POLYARROW_DIM_CAP", "2").args(["space", "l1", "--dim", "3"]).output().unwrap();
    assert_eq!(capped.status.code(), Some(2));
    let bad = bin().current_dir(&dir).env("POLYARROW_DIM_CAP", "many").args(["space", "l1", "--dim", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(run(&dir, &["arrow", "classify", "missing.json"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    let dir = workdir("fail");
    let out = run(&dir, &["verify", "correction", "--instances", "20", "--seed", "7", "--eps", "1/4"]);
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(1), "{text}");
    assert!(text.contains("failed on"));
}
