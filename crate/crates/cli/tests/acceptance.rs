//! Acceptance criterion 6, driven through the real binary: the
//! five-element antichain frame refutes distribution under `check`, the
//! named principal-upset valuation witnesses it at an atom world, and
//! `decide` refutes it within a ten-second budget.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use serde_json::Value;

const M3F_FRAME: &str = r#"{
  "elements": ["1", "a", "b", "c", "0"],
  "top": "1",
  "meet": [
    ["1","a","a"], ["1","b","b"], ["1","c","c"], ["1","0","0"],
    ["a","b","0"], ["a","c","0"], ["a","0","0"],
    ["b","c","0"], ["b","0","0"],
    ["c","0","0"]
  ],
  "admissible": "all",
  "selection": {"kind": "constant-top"}
}"#;

const DIST_PAIR: &str = "p /\\ (q \\/ r) |- (p /\\ q) \\/ (p /\\ r)";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cslogic"))
}

fn write_frame() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(M3F_FRAME.as_bytes()).unwrap();
    f
}

fn run_json(cmd: &mut Command) -> (i32, Value) {
    let out = cmd.output().expect("binary runs");
    let code = out.status.code().expect("no signal");
    let value: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is a JSON report: {e}"));
    (code, value)
}

fn eval_truth_set(frame_path: &str, formula: &str, valuation: &str) -> Vec<String> {
    let (code, report) = run_json(bin().args([
        "eval",
        "--frame",
        frame_path,
        "--formula",
        formula,
        "--valuation",
        valuation,
    ]));
    assert_eq!(code, 0);
    report["data"]["truth_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_owned())
        .collect()
}

#[test]
fn criterion_6_distribution_refuted_on_the_antichain_frame() {
    let frame = write_frame();
    let path = frame.path().to_str().unwrap();

    // the named witness: p, q, r at the three principal upsets; the left
    // side holds at world a while the right side misses it
    let valuation = r#"{"p":["a","1"],"q":["b","1"],"r":["c","1"]}"#;
    let lhs = eval_truth_set(path, "p /\\ (q \\/ r)", valuation);
    let rhs = eval_truth_set(path, "(p /\\ q) \\/ (p /\\ r)", valuation);
    assert!(lhs.contains(&"a".to_owned()));
    assert!(!rhs.contains(&"a".to_owned()));

    // the exhaustive check refutes with a re-verifiable witness
    let (code, report) = run_json(bin().args(["check", "--frame", path, "--pair", DIST_PAIR]));
    assert_eq!(code, 1, "refutation exits 1");
    assert_eq!(report["status"], "refuted");
    let witness_world = report["data"]["world"].as_str().unwrap().to_owned();
    let witness_valuation = serde_json::to_string(&report["data"]["valuation"]).unwrap();
    let lhs = eval_truth_set(path, "p /\\ (q \\/ r)", &witness_valuation);
    let rhs = eval_truth_set(path, "(p /\\ q) \\/ (p /\\ r)", &witness_valuation);
    assert!(lhs.contains(&witness_world));
    assert!(!rhs.contains(&witness_world));

    // the decision loop refutes within the stated budget
    let start = Instant::now();
    let (code, report) = run_json(bin().args([
        "decide",
        "--pair",
        DIST_PAIR,
        "--max-n",
        "5",
        "--wall-ms",
        "10000",
    ]));
    let elapsed = start.elapsed();
    assert_eq!(code, 1);
    assert_eq!(report["status"], "refuted");
    assert!(
        elapsed.as_secs() < 10,
        "decide took {elapsed:?}, budget is ten seconds"
    );
    println!(
        "criterion 6 (distribution refuted by check and decide, {elapsed:?}): PASS"
    );
}
