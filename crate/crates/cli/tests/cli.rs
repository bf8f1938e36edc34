//! Exit-code contract, report determinism, and document round-trips
//! through the binary.

use std::io::Write;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cslogic"))
}

fn file_with(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().expect("no signal"), out.stdout)
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, stdout) = run(args);
    (code, serde_json::from_slice(&stdout).expect("JSON report"))
}

const C3_SEMILATTICE: &str =
    r#"{"elements":["1","a","0"],"top":"1","meet":[["1","a","a"],["1","0","0"],["a","0","0"]]}"#;

const C2_LATTICE: &str = r#"{
  "elements": ["1", "0"], "top": "1", "bot": "0",
  "meet": [["1","0","0"]], "join": [["1","0","1"]],
  "cto": [["1","1","1"],["1","0","0"],["0","1","1"],["0","0","1"]]
}"#;

fn full_c3_frame(selection: &str) -> String {
    format!(
        r#"{{"elements":["1","a","0"],"top":"1","meet":[["1","a","a"],["1","0","0"],["a","0","0"]],"admissible":"all","selection":{{"kind":"{selection}"}}}}"#
    )
}

#[test]
fn affirmative_outcomes_exit_zero() {
    let (code, report) = run_json(&["decide", "--pair", "p |- p"]);
    assert_eq!(code, 0);
    assert_eq!(report["status"], "derivable");

    let frame = file_with(&full_c3_frame("principal-int"));
    let (code, report) = run_json(&[
        "check",
        "--frame",
        frame.path().to_str().unwrap(),
        "--pair",
        "T |- p ~> p",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["status"], "valid");

    let (code, _) = run_json(&[
        "correspond",
        "--frame",
        frame.path().to_str().unwrap(),
        "--axiom",
        "refl",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn negative_outcomes_exit_one() {
    let frame = file_with(&full_c3_frame("constant-top"));
    let (code, report) = run_json(&[
        "check",
        "--frame",
        frame.path().to_str().unwrap(),
        "--pair",
        "T ~> p |- p",
    ]);
    assert_eq!(code, 1);
    assert_eq!(report["status"], "refuted");

    let (code, report) = run_json(&["refute", "--pair", "p |- q"]);
    assert_eq!(code, 1);
    assert_eq!(report["status"], "refuted");
}

#[test]
fn unknown_outcomes_exit_two() {
    // valid everywhere but underivable within the instance restriction,
    // so the loop exhausts its bounds
    let (code, report) = run_json(&[
        "decide",
        "--pair",
        "p ~> (q /\\ r) |- p ~> q",
        "--max-n",
        "2",
        "--max-depth",
        "3",
        "--max-tables",
        "8",
    ]);
    assert_eq!(code, 2);
    assert_eq!(report["status"], "unknown");

    let (code, _) = run_json(&["prove", "--pair", "p |- q", "--max-depth", "4"]);
    assert_eq!(code, 2);
}

#[test]
fn usage_errors_exit_sixty_four() {
    let (code, _) = run(&["no-such-command"]);
    assert_eq!(code, 64);

    let (code, _) = run(&["validate"]);
    assert_eq!(code, 64);

    let frame = file_with(&full_c3_frame("identity"));
    let (code, _) = run(&[
        "correspond",
        "--frame",
        frame.path().to_str().unwrap(),
        "--axiom",
        "tr",
    ]);
    assert_eq!(code, 64);

    let (code, _) = run(&["fillin", "--frame", frame.path().to_str().unwrap(), "--kind", "bogus"]);
    assert_eq!(code, 64);
}

#[test]
fn input_errors_exit_sixty_five() {
    let bad = file_with(r#"{"elements":["1","a"],"top":"1","meet":[]}"#);
    let (code, report) = run_json(&["validate", "--semilattice", bad.path().to_str().unwrap()]);
    assert_eq!(code, 65);
    assert_eq!(report["status"], "error");

    let (code, _) = run(&["validate", "--semilattice", "/nonexistent.json"]);
    assert_eq!(code, 65);

    let frame = file_with(&full_c3_frame("identity"));
    let (code, _) = run(&[
        "check",
        "--frame",
        frame.path().to_str().unwrap(),
        "--pair",
        "p |-",
    ]);
    assert_eq!(code, 65);

    // primed conditions need a full or descriptive frame
    let proper = file_with(
        r#"{"elements":["1","a","0"],"top":"1",
            "meet":[["1","a","a"],["1","0","0"],["a","0","0"]],
            "admissible":[["1"],["1","a","0"]],
            "selection":{"kind":"identity"}}"#,
    );
    let (code, _) = run(&[
        "correspond",
        "--frame",
        proper.path().to_str().unwrap(),
        "--axiom",
        "mp",
        "--primed",
    ]);
    assert_eq!(code, 65);
}

#[test]
fn strategy_flag_selects_the_table_pool() {
    let (code, report) = run_json(&[
        "refute",
        "--pair",
        "p /\\ (p ~> q) |- q",
        "--max-n",
        "2",
        "--max-tables",
        "16",
        "--strategy",
        "exhaustive",
    ]);
    assert_eq!(code, 1);
    assert_eq!(report["status"], "refuted");

    let (code, _) = run(&["refute", "--pair", "p |- q", "--strategy", "bogus"]);
    assert_eq!(code, 64);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "decide",
        "--pair",
        "p /\\ (p ~> q) |- q",
        "--seed",
        "7",
        "--max-n",
        "3",
    ];
    let (code_a, out_a) = run(&args);
    let (code_b, out_b) = run(&args);
    assert_eq!(code_a, code_b);
    assert_eq!(out_a, out_b);
}

#[test]
fn validate_reports_law_violations() {
    // a ⋏ b = a, b ⋏ c = b, a ⋏ c = c is not associative
    let bad = file_with(
        r#"{"elements":["1","a","b","c"],"top":"1",
            "meet":[["1","a","a"],["1","b","b"],["1","c","c"],
                    ["a","b","a"],["b","c","b"],["a","c","c"]]}"#,
    );
    let (code, report) = run_json(&["validate", "--semilattice", bad.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(report["status"], "invalid");
    assert!(!report["data"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn dual_output_round_trips_as_a_frame_document() {
    let lattice = file_with(C2_LATTICE);
    let (code, report) = run_json(&["dual", "--lattice", lattice.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let frame_doc = serde_json::to_string(&report["data"]["frame"]).unwrap();
    let frame_file = file_with(&frame_doc);
    let (code, report) = run_json(&["validate", "--frame", frame_file.path().to_str().unwrap()]);
    assert_eq!(code, 0, "dual emits a valid frame: {report}");
    let (code, _) = run_json(&["eta-check", "--frame", frame_file.path().to_str().unwrap()]);
    assert_eq!(code, 0);
}

#[test]
fn int_eval_requires_distributivity() {
    let c3 = file_with(C3_SEMILATTICE);
    let (code, report) = run_json(&[
        "int-eval",
        "--semilattice",
        c3.path().to_str().unwrap(),
        "--formula",
        "p \\/ (p ~> F)",
        "--valuation",
        r#"{"p":["a","1"]}"#,
    ]);
    assert_eq!(code, 0);
    let truth: Vec<&str> = report["data"]["truth_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(truth, ["1", "a"]);

    let m3 = file_with(
        r#"{"elements":["1","a","b","c","0"],"top":"1",
            "meet":[["1","a","a"],["1","b","b"],["1","c","c"],["1","0","0"],
                    ["a","b","0"],["a","c","0"],["a","0","0"],
                    ["b","c","0"],["b","0","0"],["c","0","0"]]}"#,
    );
    let (code, report) = run_json(&[
        "int-eval",
        "--semilattice",
        m3.path().to_str().unwrap(),
        "--formula",
        "p ~> p",
        "--valuation",
        r#"{"p":["a","1"]}"#,
    ]);
    assert_eq!(code, 65);
    assert!(report["data"]["error"]
        .as_str()
        .unwrap()
        .contains("not distributive"));
}

#[test]
fn text_format_prints_human_summary() {
    let (code, stdout) = {
        let out = bin()
            .args(["decide", "--pair", "p |- p", "--format", "text"])
            .output()
            .unwrap();
        (out.status.code().unwrap(), out.stdout)
    };
    assert_eq!(code, 0);
    let text = String::from_utf8(stdout).unwrap();
    assert!(text.starts_with("decide: derivable"));
}

#[test]
fn enumerate_streams_documents() {
    let (code, report) = run_json(&["enumerate", "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(report["data"]["count"], 2);
    assert_eq!(
        report["data"]["semilattices"].as_array().unwrap().len(),
        2
    );
    let (code, report) = run_json(&["enumerate", "--n", "4", "--labeled", "--count-only"]);
    assert_eq!(code, 0);
    assert_eq!(report["data"]["count"], 9);
    assert!(report["data"]["semilattices"].is_null());
}
