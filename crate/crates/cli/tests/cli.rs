use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SINGLET: &str = r#"{"dims":[2,2],"matrix":[
 [[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0.5,0],[-0.5,0],[0,0]],
 [[0,0],[-0.5,0],[0.5,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0]]]}"#;

const MIXED_QUBIT: &str = r#"{"dims":[2],"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn detect_singlet() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "singlet.json", SINGLET);
    let report = dir.path().join("report.json");
    let o = spa(&[
        "detect",
        "--state",
        &state,
        "--cut",
        "A|B",
        "--json",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("detected"));
    let v = read_json(&report);
    let cut = &v["cuts"][0];
    assert_eq!(cut["cut"], "A|B");
    assert_eq!(cut["verdict"], "detected");
    assert_eq!(cut["ppt"], "NPT");
    assert!(cut["value"].as_f64().unwrap().abs() < 1e-12);
    assert!((cut["threshold"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    assert!(v.get("estimator").is_none());
}

#[test]
fn detect_with_estimator_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "singlet.json", SINGLET);
    let mut reports = Vec::new();
    for i in 0..2 {
        let report = dir.path().join(format!("r{i}.json"));
        let o = spa(&[
            "detect",
            "--state",
            &state,
            "--cut",
            "B|A",
            "--shots",
            "10000",
            "--confidence",
            "0.99",
            "--seed",
            "7",
            "--json",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        reports.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let v: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["estimator"]["verdict"], "detected");
    assert_eq!(v["estimator"]["shots"], 10000);
}

#[test]
fn bad_cut_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "singlet.json", SINGLET);
    assert_eq!(
        code(&spa(&["detect", "--state", &state, "--cut", "A|C"])),
        2
    );
    assert_eq!(code(&spa(&["detect", "--state", &state, "--cut", "AB"])), 2);
}

#[test]
fn invalid_state_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(
        dir.path(),
        "trace.json",
        r#"{"dims":[2],"matrix":[[[0.45,0],[0,0]],[[0,0],[0.45,0]]]}"#,
    );
    let o = spa(&["detect", "--state", &trace, "--cut", "A|B"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace"));
    let missing = dir.path().join("nope.json");
    assert_eq!(
        code(&spa(&[
            "detect",
            "--state",
            missing.to_str().unwrap(),
            "--cut",
            "A|B"
        ])),
        2
    );
    let junk = write(dir.path(), "junk.json", "{not json");
    assert_eq!(code(&spa(&["apply-approx-transpose", "--state", &junk])), 2);
}

#[test]
fn tripartite_demo() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("t.json");
    let o = spa(&["tripartite-demo", "--json", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("A|BC") && out.contains("B|CA") && out.contains("C|AB"));
    let v = read_json(&report);
    let verdicts: Vec<&str> = v["cuts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["verdict"].as_str().unwrap())
        .collect();
    assert_eq!(verdicts, ["detected", "boundary", "boundary"]);
    let ppt: Vec<&str> = v["cuts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["ppt"].as_str().unwrap())
        .collect();
    assert_eq!(ppt, ["NPT", "PPT", "PPT"]);
    assert!((v["reference"]["oracle"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-10);
    assert!((v["reference"]["nominal"].as_f64().unwrap() - 1.0 / 18.0).abs() < 1e-15);
}

#[test]
fn verify_design_cases() {
    assert_eq!(
        code(&spa(&["verify-design", "--dim", "4", "--kind", "mub"])),
        2
    );
    assert_eq!(
        code(&spa(&["verify-design", "--dim", "5", "--kind", "mub"])),
        0
    );
    assert_eq!(
        code(&spa(&["verify-design", "--dim", "2", "--kind", "sic"])),
        0
    );
    assert_eq!(
        code(&spa(&["verify-design", "--dim", "4", "--kind", "sic"])),
        2
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "f.json",
        r#"{"d":2,"amplitudes":[[1,0],[0,0]]}"#,
    );
    assert_eq!(
        code(&spa(&[
            "verify-design",
            "--dim",
            "2",
            "--kind",
            "sic",
            "--fiducial",
            &bad
        ])),
        1
    );
}

#[test]
fn search_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let fid = dir.path().join("fid4.json");
    let o = spa(&[
        "search-fiducial",
        "--dim",
        "4",
        "--seed",
        "3",
        "--out",
        fid.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = spa(&[
        "verify-design",
        "--dim",
        "4",
        "--kind",
        "sic",
        "--fiducial",
        fid.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = spa(&["search-fiducial", "--dim", "3", "--max-iters", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn apply_cross_checks_all_realizations() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "m.json", MIXED_QUBIT);
    for via in ["formula", "design", "two-step", "optics"] {
        let out = dir.path().join(format!("{via}.json"));
        let report = dir.path().join(format!("{via}-report.json"));
        let o = spa(&[
            "apply-approx-transpose",
            "--state",
            &state,
            "--via",
            via,
            "--out",
            out.to_str().unwrap(),
            "--json",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{via}: {}", String::from_utf8_lossy(&o.stderr));
        let r = read_json(&report);
        assert_eq!(r["cross_check"].as_array().unwrap().len(), 6);
        let s = read_json(&out);
        assert!((s["matrix"][0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn apply_qutrit_without_optics() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(
        dir.path(),
        "q.json",
        r#"{"dims":[3],"matrix":[[[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]]]}"#,
    );
    let o = spa(&[
        "apply-approx-transpose",
        "--state",
        &state,
        "--via",
        "two-step",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["matrix"][0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["matrix"][1][1][0].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(
        code(&spa(&[
            "apply-approx-transpose",
            "--state",
            &state,
            "--via",
            "optics"
        ])),
        2
    );
}

#[test]
fn verify_all_small() {
    let o = spa(&["verify-all", "--max-dim", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("PASS").count(), 13);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&spa(&[])), 2);
    assert_eq!(code(&spa(&["verify-design", "--dim", "2"])), 2);
    assert_eq!(code(&spa(&["verify-all", "--max-dim", "1"])), 2);
}
