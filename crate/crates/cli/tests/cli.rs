use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coverlens")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn compute_discrete_singletons() {
    let o = run(&["compute", "--space", &data("discrete4.json"), "--cover", &data("singletons4.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("L = 1, mesh = 0"));
}

#[test]
fn compute_ldiam_reports_bad_set() {
    let o = run(&["compute", "--space", &data("line5.json"), "--cover", &data("line5_cover.json"), "--variant", "Ldiam"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "L_diam = 2, bad set {1,3}");
}

#[test]
fn compute_per_point_table() {
    let o = run(&["compute", "--space", &data("line5.json"), "--cover", &data("line5_cover.json"), "--per-point"]);
    let out = stdout(&o);
    assert!(out.starts_with("L = 1, mesh = 2\nattained at 2\n"), "{out}");
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn compute_boxes_in_chosen_ambient() {
    let base = ["compute", "--space", &data("r3.json"), "--cover", &data("box_chain.json"), "--subset", "[0,1]^2x{0}"];
    let o = run(&[&base[..], &["--ambient", "slice:R2x{0}"]].concat());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("L = 1/4,"), "{}", stdout(&o));
    let o = run(&base);
    assert!(stdout(&o).starts_with("L = 1/8,"), "{}", stdout(&o));
}

#[test]
fn json_reports_are_byte_identical() {
    let args = ["--json", "compute", "--space", &data("line5.json"), "--cover", &data("line5_cover.json"), "--variant", "Lrad"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["value"], "1");
    assert_eq!(v["variant"], "rad");
}

#[test]
fn check_lemmas() {
    let o = run(&["check", "diam", "--space", &data("discrete4.json"), "--cover", &data("singletons4.json")]);
    assert_eq!((code(&o), stdout(&o).trim().to_string()), (0, "1 ≤ 1 ≤ 2 PASS".to_string()));
    let o = run(&[
        "check", "chain", "--space", &data("line5.json"), "--cover", &data("line5_cover.json"), "--subset", "{1,2}",
        "--ambient", "{0,1,2,3}",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).trim().ends_with("PASS"));
    let o = run(&[
        "check", "chain", "--space", &data("r3.json"), "--cover", &data("box_chain.json"), "--subset", "[0,1]^2x{0}",
        "--ambient", "R2x{0}",
    ]);
    assert_eq!(stdout(&o).trim(), "1/8 ≤ 1/4 ≤ 3/8 PASS");
    let o = run(&["check", "second-kind", "--space", &data("discrete4.json"), "--cover", &data("singletons4.json")]);
    assert_eq!(stdout(&o).trim(), "0 ≤ 0 PASS");
    let o = run(&["check", "homothety", "--homothety", &data("plane_in_space.json")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn check_refinement_statement() {
    let base = ["check", "refinement", "--space", &data("line5.json"), "--cover", &data("line5_cover.json")];
    let o = run(&[&base[..], &["--radius", "1/2"]].concat());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("balls refine PASS"));
    let o = run(&[&base[..], &["--radius", "3"]].concat());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("do not refine"));
}

#[test]
fn transport_ambient_modes() {
    let base = ["check", "transport", "--homothety", &data("plane_in_space.json"), "--cover", &data("plane_cover.json"), "--subset", "[0,1]^2"];
    let o = run(&[&base[..], &["--ambient", "codomain"]].concat());
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("mesh upper      sqrt(53/16) ≤ sqrt(13/4) FAIL"), "{out}");
    assert!(out.contains("lebesgue lower  1/4 ≤ 1/8 FAIL"), "{out}");
    let o = run(&[&base[..], &["--ambient", "image"]].concat());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("PASS").count(), 4);
}

#[test]
fn reproduce_examples() {
    for id in ["interval-tail", "discrete", "box-chain", "counterexample-44", "corrected-44", "ball-tail"] {
        let o = run(&["reproduce", id]);
        assert_eq!(code(&o), 0, "{id}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
    let o = run(&["--json", "reproduce", "box-chain"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let got: Vec<&str> = v["lines"].as_array().unwrap().iter().map(|l| l["got"].as_str().unwrap()).collect();
    assert_eq!(got, ["3/8", "1/4", "1/8"]);
    assert_eq!(code(&run(&["reproduce", "nope"])), 2);
}

#[test]
fn fuzz_gate_writes_findings() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fuzz.json");
    std::fs::write(&config, r#"{"seed": 7, "trials": 40, "box_trials": 10, "homothety_trials": 10}"#).unwrap();
    let results = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_coverlens"))
        .args(["fuzz", "--config", config.to_str().unwrap()])
        .env("COVERLENS_RESULTS_DIR", &results)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 violations"));
    assert!(stdout(&o).trim().ends_with("PASS"));
    let files: Vec<_> = std::fs::read_dir(&results).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, vec![std::ffi::OsString::from("findings-seed7.json")]);
}

#[test]
fn invalid_input_exits_two() {
    let o = run(&["validate", "--space", &data("bad_metric.json")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a metric"));
    let o = run(&["compute", "--space", &data("line5.json"), "--cover", &data("singletons4.json")]);
    assert_eq!(code(&o), 2);
    let o = run(&["compute", "--space", &data("r3.json"), "--cover", &data("box_chain.json")]);
    assert_eq!(code(&o), 2, "unbounded subset");
    let o = run(&["validate", "--space", &data("line5.json"), "--cover", &data("line5_cover.json")]);
    assert_eq!(code(&o), 0);
}
