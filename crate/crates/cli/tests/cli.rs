use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_troptev")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn compute_reports_value_and_zero_reason() {
    let out = run(&["compute", "--input", &data("mixed_a1_n4.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["value"], "24");
    let out = run(&["compute", "--input", &data("long_mu1.json")]);
    let v = json(&out);
    assert_eq!(v["value"], "0");
    assert_eq!(v["zero_reason"], "Mu1TooLong");
}

#[test]
fn invalid_input_exits_with_two() {
    let out = run(&["compute", "--input", &data("weighted_a2_n5_unbalanced.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["violations"][0]["kind"], "BalanceViolation");
    let out = run(&["compute", "--input", "/nonexistent/contact.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["compute"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn p2_flag_switches_formula() {
    let out = run(&["compute", "--input", &data("p2_degree2.json"), "--p2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["value"], "1");
    let out = run(&["compute", "--input", &data("weighted_a2_n5.json"), "--p2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_output_feeds_points_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["enumerate", "--input", &data("weighted_a2_n5.json"), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let first = json(&out);
    assert_eq!(first["report"]["trop_tev"], "512");
    let saved = dir.path().join("enumeration.json");
    std::fs::write(&saved, &out.stdout).unwrap();

    let again = run(&["enumerate", "--input", &data("weighted_a2_n5.json"), "--points", saved.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(json(&again)["curves"], first["curves"]);

    let svg_dir = dir.path().join("svg");
    let out = run(&["render", "--curves", saved.to_str().unwrap(), "--out", svg_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let listing = json(&out);
    assert_eq!(listing["curves"], 4);
    let files = listing["files"].as_array().unwrap();
    assert_eq!(files.len(), 5);
    for f in files {
        let text = std::fs::read_to_string(svg_dir.join(f["file"].as_str().unwrap())).unwrap();
        assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    }
    assert!(svg_dir.join("contact_sheet.svg").exists());
}

#[test]
fn sweep_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&["--threads", "2", "sweep", "--a", "1..2", "--s1-max", "2", "--wmax", "3", "--nmax", "4", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["disagreements"], 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,n,mu1,mu2,mu3,mu4,formula,oracle,agree"));
    assert_eq!(lines.count() as u64, summary["instances"].as_u64().unwrap());
}

#[test]
fn manifest_replays_to_the_same_digest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.json");
    let out = run(&["--manifest", manifest.to_str().unwrap(), "verify", "--input", &data("all_ones_a2_n3.json"), "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "verify");
    assert_eq!(m["seed"], 4);
    assert!(!m["argv"].as_array().unwrap().iter().any(|a| a == "--manifest"));

    let out = run(&["replay", "--from", manifest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["reproduced"], true);
    assert_eq!(r["digest"], m["result_digest"]);
}

#[test]
fn compare_and_conjecture_commands() {
    let out = run(&["compare", "--parity", "odd", "--j", "1", "--d", "2", "--k", "0", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "Separated");
    assert_eq!(v["constraints_satisfied"], true);

    let out = run(&["identities", "--xrange", "-3..3", "--yrange", "0..3", "--nmax", "5", "--grid-nmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);

    let out = run(&["conjecture", "pbundle", "--r", "1", "--a", "1", "--mu", "[[1],[1],[1],[1]]", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
}
