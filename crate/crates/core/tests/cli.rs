use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn confine(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confine"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

const CROSS: &str = r#"{"id":"cross","vectors":[[1,0],[0,1],[-1,0],[0,-1]]}"#;

#[test]
fn generate_antipodal_pairs() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", r#"{"kind":"antipodal","pairs":2,"seed":4}"#);
    let out = confine(&["generate", "spec.json", "--out", "inst.jsonl"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let recs = lines(&dir.path().join("inst.jsonl"));
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["id"], "gen-4-0");
    assert_eq!(recs[0]["vectors"].as_array().unwrap().len(), 4);
}

#[test]
fn failed_generation_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", r#"[{"kind":"antipodal","pairs":2,"seed":1},{"kind":"closure","n":200,"seed":1,"max_retry":0}]"#);
    let out = confine(&["generate", "spec.json", "--out", "inst.jsonl"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("inst.jsonl").exists());

    write(dir.path(), "bad.json", r#"{"kind":"closure","n":1,"seed":1}"#);
    assert_eq!(code(&confine(&["generate", "bad.json", "--out", "x.jsonl"], dir.path())), 2);
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&confine(&["generate", "nope.json", "--out", "x"], dir.path())), 3);
    assert_eq!(code(&confine(&["verify", "nope.jsonl"], dir.path())), 3);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&confine(&["frobnicate"], dir.path())), 2);
    write(dir.path(), "i.jsonl", CROSS);
    assert_eq!(code(&confine(&["run", "i.jsonl", "--out", "r", "--algorithms", "sqrt7"], dir.path())), 2);
}

#[test]
fn cross_with_all_algorithms_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.jsonl", &format!("{CROSS}\n"));
    let out = confine(&["run", "i.jsonl", "--out", "r.jsonl", "--oracle", "--algorithms", "all"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let recs = lines(&dir.path().join("r.jsonl"));
    assert_eq!(recs.len(), 4);
    let tags: Vec<&str> = recs.iter().map(|r| r["algorithm_tag"].as_str().unwrap()).collect();
    assert_eq!(tags, ["sector", "sqrt5", "steinitz2", "weighted"]);
    for r in &recs[..3] {
        assert_eq!(r["bound_satisfied"], true);
        assert_eq!(r["oracle_radius"], 1.0);
        assert_eq!(r["achieved_radius"], 1.0);
    }
    // A plain instance gives the weighted construction nothing to do.
    assert!(recs[3]["skipped"].is_string());
    assert_eq!(code(&confine(&["verify", "r.jsonl"], dir.path())), 0);
}

#[test]
fn bad_instance_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.jsonl", &format!("{CROSS}\n\n{{\"id\":\"x\",\"vectors\":[[1]]}}\n"));
    let out = confine(&["run", "i.jsonl", "--out", "r.jsonl"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("i.jsonl:3"));
    assert!(!dir.path().join("r.jsonl").exists());
}

#[test]
fn empty_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.jsonl", "");
    assert_eq!(code(&confine(&["run", "i.jsonl", "--out", "r.jsonl"], dir.path())), 0);
    assert_eq!(fs::read_to_string(dir.path().join("r.jsonl")).unwrap(), "");
    assert_eq!(code(&confine(&["verify", "r.jsonl"], dir.path())), 0);
}

#[test]
fn weighted_routing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.jsonl", r#"{"id":"w","weights":[0.5,0.25,0.25],"angles":[0,3.141592653589793,3.141592653589793]}"#);
    assert_eq!(code(&confine(&["run", "i.jsonl", "--out", "r.jsonl"], dir.path())), 0);
    let recs = lines(&dir.path().join("r.jsonl"));
    for r in &recs {
        if r["algorithm_tag"] == "weighted" {
            assert_eq!(r["achieved_radius"], 0.25);
            assert_eq!(r["claimed_bound"], 1.0);
            assert!(r.get("skipped").is_none());
        } else {
            assert!(r["skipped"].is_string());
            assert!(r["achieved_radius"].is_null());
        }
    }
}

fn pipeline(dir: &Path, tag: &str) -> Vec<u8> {
    write(
        dir,
        "spec.json",
        r#"[{"kind":"centered","n":7,"seed":11,"count":5},
            {"kind":"sector","n":20,"alpha":4.5,"seed":12,"count":3},
            {"kind":"weighted_pairs","n":6,"seed":13,"count":2},
            {"kind":"antipodal","n":3,"seed":14}]"#,
    );
    let inst = format!("inst-{tag}.jsonl");
    let recs = format!("rec-{tag}.jsonl");
    let sum = format!("sum-{tag}.json");
    let csv = format!("rec-{tag}.csv");
    assert_eq!(code(&confine(&["generate", "spec.json", "--out", &inst], dir)), 0);
    let out = confine(&["run", &inst, "--out", &recs, "--oracle", "--embed-perms", "--workers", tag], dir);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&confine(&["verify", &recs, "--out", &sum], dir)), 0);
    assert_eq!(code(&confine(&["summarize", &recs, "--csv", &csv], dir)), 0);
    let mut bytes = Vec::new();
    for f in [inst, recs, sum, csv] {
        bytes.extend(fs::read(dir.join(f)).unwrap());
    }
    bytes
}

#[test]
fn pipeline_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = pipeline(dir.path(), "1");
    let b = pipeline(dir.path(), "4");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn verify_catches_a_corrupted_radius() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.jsonl", CROSS);
    confine(&["run", "i.jsonl", "--out", "r.jsonl", "--embed-perms"], dir.path());
    let text = fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    let corrupted = text.replacen("\"achieved_radius\":1.0", "\"achieved_radius\":0.7", 1);
    assert_ne!(text, corrupted);
    write(dir.path(), "bad.jsonl", &corrupted);
    let out = confine(&["verify", "bad.jsonl"], dir.path());
    assert_eq!(code(&out), 1);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verification"]["mismatched_ids"], serde_json::json!(["cross"]));
}

#[test]
fn verify_without_embedded_perms_notes_it() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "i.jsonl", CROSS);
    confine(&["run", "i.jsonl", "--out", "r.jsonl"], dir.path());
    let out = confine(&["verify", "r.jsonl"], dir.path());
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["notes"][0].as_str().unwrap().contains("internal consistency"));
    assert_eq!(report["sector_note"]["rows"][1]["formula_bound"], 1.0);
}

#[test]
fn search_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s.json",
        r#"{"n":2,"objective":"oracle_radius","restarts":3,"steps_per_restart":200,"step_scale":0.2,"seed":5}"#,
    );
    let run = |out: &str| {
        let o = confine(&["search", "s.json", "--out", out, "--history-csv", &format!("{out}.csv")], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert!((report["best_radius"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let csv = fs::read_to_string(dir.path().join("a.json.csv")).unwrap();
    assert!(csv.starts_with("restart,iteration,radius\n"));

    write(
        dir.path(),
        "bad.json",
        r#"{"n":40,"objective":"oracle_radius","restarts":3,"steps_per_restart":10,"step_scale":0.2,"seed":5}"#,
    );
    assert_eq!(code(&confine(&["search", "bad.json", "--out", "x.json"], dir.path())), 2);
    assert!(!dir.path().join("x.json").exists());
}
