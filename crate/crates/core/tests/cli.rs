use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rapidseries"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn doc(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

/// Every string leaf that looks numeric must be an exact rational or integer,
/// apart from the `approx` renderings.
fn assert_no_floats(v: &Value, key: &str) {
    match v {
        Value::Number(n) => assert!(!n.is_f64(), "float under {key}"),
        Value::Object(m) => m.iter().for_each(|(k, v)| assert_no_floats(v, k)),
        Value::Array(a) => a.iter().for_each(|v| assert_no_floats(v, key)),
        Value::String(s) if key != "approx" && s.contains('.') && s.parse::<f64>().is_ok() => {
            panic!("decimal string {s} under {key}")
        }
        _ => {}
    }
}

#[test]
fn construct_output_pipes_into_verify() {
    let built = run(&["construct", "--w", "1,1", "--C", "3/2", "--depth", "12"]);
    assert_eq!(built.status.code(), Some(0));
    assert_no_floats(&doc(&built), "");

    let mut child = bin()
        .args(["verify", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&built.stdout).unwrap();
    let checked = child.wait_with_output().unwrap();
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(doc(&checked)["result"]["certificates"][0]["verdict"], "valid");
}

#[test]
fn verify_reports_each_path_and_the_worst_code() {
    let good = scratch("good.json");
    let bad = scratch("bad.json");
    let out = run(&["construct", "--w", "1", "--C", "2", "--depth", "12", "--out", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let mut cert: Value = serde_json::from_str(&std::fs::read_to_string(&good).unwrap()).unwrap();
    cert["C"] = Value::String("3".into());
    std::fs::write(&bad, cert.to_string()).unwrap();

    let out = run(&["verify", good.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let results = &doc(&out)["result"]["certificates"];
    assert_eq!(results[0]["verdict"], "valid");
    assert_eq!(results[1]["verdict"], "invalid");

    let missing = scratch("missing.json");
    let out = run(&["verify", good.to_str().unwrap(), missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_configuration_matches_flags() {
    let cfg = scratch("roots.json");
    std::fs::write(&cfg, r#"{"command": "roots", "w": "1,0,2,1", "poly": "tilde", "prec": "1e-12"}"#).unwrap();
    let from_config = run(&["--config", cfg.to_str().unwrap()]);
    let from_flags = run(&["roots", "--w", "1,0,2,1", "--poly", "tilde", "--prec", "1e-12"]);
    assert_eq!(from_config.status.code(), Some(0));
    assert_eq!(from_config.stdout, from_flags.stdout);

    std::fs::write(&cfg, r#"{"command": "roots", "w": "1,1", "precision": "1e-3"}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(doc(&out)["error"]["kind"], "InvalidParameter");
}

#[test]
fn exit_codes_cover_each_class() {
    assert_eq!(run(&["roots", "--w", "1,1"]).status.code(), Some(0));
    assert_eq!(run(&["roots", "--w", "2,0"]).status.code(), Some(3));
    assert_eq!(run(&["roots"]).status.code(), Some(3));
    let hyp = run(&["hypotheses", "--w", "1", "--seq", "identity", "--eta", "1/4", "--tau", "1/2"]);
    assert_eq!(hyp.status.code(), Some(1));
    // A finite list carries no tail certificate.
    let out = run(&["eval", "--w", "1", "--seq", "list:2,4,8"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(doc(&out)["error"]["kind"], "NoCertificate");
    let out = run(&["construct", "--w", "1", "--C", "2", "--x", "1/15", "--depth", "12"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(doc(&out)["error"]["kind"], "TargetOutsideRange");
}

#[test]
fn diagnose_reports_peaks_and_gaps() {
    let out = run(&[
        "diagnose", "--w", "1,1", "--seq", "tower:2,2", "--horizon", "8", "--local", "all",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let d = doc(&out);
    assert_no_floats(&d, "");
    let r = &d["result"];
    assert_eq!(r["mu"].as_array().unwrap().len(), 8);
    assert!(!r["local_peaks"].as_array().unwrap().is_empty());
    assert!(r["gaps"].as_array().unwrap().iter().all(|g| g["integrality_ok"] == true));
}

#[test]
fn sequence_files_are_read() {
    let path = scratch("seq.txt");
    std::fs::write(&path, "2\n4\n8\n16\n32\n64\n").unwrap();
    let spec = format!("file:{}", path.display());
    let out = run(&["hypotheses", "--w", "1", "--seq", &spec, "--eta", "1/4", "--tau", "1/2", "--horizon", "6"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn plain_output_has_one_line_per_leaf() {
    let out = run(&["--format", "plain", "roots", "--w", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "result.lo: 2"));
    assert!(text.lines().any(|l| l == "result.exact: true"));
}
