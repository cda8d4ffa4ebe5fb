use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use stochsand::cli::{run, CommandResult, Status};
use tempfile::TempDir;

fn cli(args: &[&str]) -> CommandResult {
    run(std::iter::once("stochsand").chain(args.iter().copied()))
}

fn ok(args: &[&str]) -> Value {
    let r = cli(args);
    assert_eq!(r.status, Status::Ok, "{args:?}: {}", r.payload);
    assert_eq!(r.exit_code(), 0);
    r.payload
}

/// Writes the model printed by a `preset` invocation.
fn preset(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let mut full = vec!["preset"];
    full.extend_from_slice(args);
    let payload = ok(&full);
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&payload).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn triangle(dir: &TempDir) -> PathBuf {
    preset(
        dir,
        "triangle.json",
        &[
            "paper-triangle-ssm",
            "--alpha",
            "1/4",
            "--beta",
            "1/4",
            "--gamma",
            "1/2",
        ],
    )
}

#[test]
fn validate_reports_sites_and_thresholds() {
    let dir = TempDir::new().unwrap();
    let payload = ok(&["validate", s(&triangle(&dir))]);
    assert_eq!(payload["n_sites"], 2);
    assert_eq!(payload["thresholds"], json!([2, 2]));
    assert_eq!(payload["dissipative"], true);
}

#[test]
fn depth_of_the_chain_preset() {
    let dir = TempDir::new().unwrap();
    let chain = preset(&dir, "chain.json", &["single-grain", "--path", "3"]);
    let payload = ok(&["depth", s(&chain)]);
    assert_eq!(payload["depth"], 3);
    assert_eq!(payload["layers"], json!([[1], [2], [3]]));
    assert_eq!(payload["witness"], Value::Null);
}

#[test]
fn stationary_law_of_the_triangle() {
    let dir = TempDir::new().unwrap();
    let payload = ok(&["stationary", s(&triangle(&dir)), "--mu", "1/3,2/3"]);
    let states = payload["states"].as_array().unwrap();
    let pi = payload["pi"].as_array().unwrap();
    let by_state: Vec<(Value, Value)> = states.iter().cloned().zip(pi.iter().cloned()).collect();
    assert_eq!(
        by_state,
        vec![
            (json!([1, 2]), json!("2/9")),
            (json!([2, 1]), json!("2/9")),
            (json!([2, 2]), json!("5/9")),
        ]
    );
    assert_eq!(payload["period"], 1);
    let floats = ok(&[
        "stationary",
        s(&triangle(&dir)),
        "--mu",
        "1/3,2/3",
        "--float",
    ]);
    assert_eq!(floats["states"], payload["states"]);
    assert!((floats["pi"][2].as_f64().unwrap() - 5.0 / 9.0).abs() < 1e-12);
}

#[test]
fn mu_can_come_from_a_file() {
    let dir = TempDir::new().unwrap();
    let mu = dir.path().join("mu.json");
    std::fs::write(&mu, r#"["1/3", "2/3"]"#).unwrap();
    let a = ok(&["stationary", s(&triangle(&dir)), "--mu", s(&mu)]);
    let b = ok(&["stationary", s(&triangle(&dir)), "--mu", "1/3,2/3"]);
    assert_eq!(a, b);
}

#[test]
fn matrix_variants() {
    let dir = TempDir::new().unwrap();
    let t = triangle(&dir);
    let collapsed = ok(&["matrix", s(&t), "--collapsed", "--mu", "1/3,2/3"]);
    assert_eq!(collapsed["states"], json!([[1, 1], [1, 2], [2, 1], [2, 2]]));
    for row in collapsed["matrix"].as_array().unwrap() {
        assert_eq!(row.as_array().unwrap().len(), 4);
        assert!(row[0].as_str().unwrap().contains('/'));
    }
    let extended = ok(&["matrix", s(&t), "--extended", "--mu", "1/3,2/3"]);
    assert_eq!(extended["n_stable"], 4);
    assert_eq!(extended["matrix"].as_array().unwrap().len(), 8);
    let per_site = ok(&["matrix", s(&t), "--per-site", "1", "--float"]);
    for row in per_site["matrix"].as_array().unwrap() {
        let sum: f64 = row
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    assert_eq!(cli(&["matrix", s(&t), "--per-site", "3"]).exit_code(), 1);
}

#[test]
fn commute_classes_and_mu_independence() {
    let dir = TempDir::new().unwrap();
    let t = triangle(&dir);
    assert_eq!(ok(&["commute", s(&t)])["holds"], true);
    let classes = ok(&["classes", s(&t), "--mu", "1/3,2/3"]);
    let recurrent: Vec<&Value> = classes["classes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["recurrent"] == true)
        .collect();
    assert_eq!(recurrent.len(), 1);
    assert_eq!(recurrent[0]["period"], 1);
    let list = dir.path().join("mus.json");
    std::fs::write(&list, r#"[["1/3","2/3"],["1/2","1/2"],["7/8","1/8"]]"#).unwrap();
    let report = ok(&["mu-independence", s(&t), "--mu-list", s(&list)]);
    assert_eq!(report["holds"], true);
}

#[test]
fn stabilize_with_log_and_explicit_decks() {
    let dir = TempDir::new().unwrap();
    let t = triangle(&dir);
    let deck = dir.path().join("deck.json");
    std::fs::write(&deck, "[[[-1,1],[-1,1],[-2,1]],[[1,-1],[1,-2],[0,-1]]]").unwrap();
    let payload = ok(&[
        "stabilize",
        s(&t),
        "--config",
        "3,2",
        "--deck",
        s(&deck),
        "--log",
    ]);
    assert_eq!(payload["configuration"], json!([1, 2]));
    assert_eq!(payload["counters"], json!([3, 2]));
    assert_eq!(payload["log"].as_array().unwrap().len(), 5);
    let seeded = ok(&[
        "stabilize",
        s(&t),
        "--config",
        "4,4",
        "--seed",
        "5",
        "--policy",
        "largest",
    ]);
    let again = ok(&[
        "stabilize",
        s(&t),
        "--config",
        "4,4",
        "--seed",
        "5",
        "--policy",
        "random:3",
    ]);
    assert_eq!(seeded, again);
}

#[test]
fn simulate_compares_with_the_exact_law() {
    let dir = TempDir::new().unwrap();
    let t = triangle(&dir);
    let payload = ok(&[
        "simulate",
        s(&t),
        "--steps",
        "20000",
        "--seed",
        "1",
        "--mu",
        "1/3,2/3",
        "--compare-exact",
        "--replicas",
        "2",
    ]);
    assert!(payload["tv_distance"].as_f64().unwrap() < 0.05);
    assert_eq!(payload["seeds"], json!([1, 2]));
}

#[test]
fn errors_and_usage() {
    let dir = TempDir::new().unwrap();
    assert_eq!(cli(&[]).exit_code(), 2);
    assert_eq!(cli(&["validate"]).exit_code(), 2);
    assert_eq!(cli(&["validate", "x.json", "--bogus"]).exit_code(), 2);
    assert_eq!(cli(&["frobnicate"]).exit_code(), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"n_sites": 1, "topplings": [[{"delta": [-1], "prob": "1/2"}]]}"#,
    )
    .unwrap();
    let r = cli(&["validate", s(&bad)]);
    assert_eq!(r.status, Status::Error);
    assert_eq!(r.exit_code(), 1);
    let exchange = dir.path().join("exchange.json");
    std::fs::write(
        &exchange,
        r#"{"n_sites": 2, "topplings": [[{"delta": [-1, 1], "prob": "1/1"}], [{"delta": [1, -1], "prob": "1/1"}]]}"#,
    )
    .unwrap();
    assert_eq!(ok(&["depth", s(&exchange)])["witness"], json!([1, 2]));
    assert_eq!(cli(&["stationary", s(&exchange)]).exit_code(), 1);
    let r = cli(&[
        "stabilize",
        s(&exchange),
        "--config",
        "2,2",
        "--fuel",
        "1000",
    ]);
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn every_preset_round_trips_through_validate() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("graph.json");
    std::fs::write(
        &graph,
        r#"{"n_sites": 2, "edge_mult": [[0,1],[1,0]], "sink_mult": [1,1]}"#,
    )
    .unwrap();
    let routing = dir.path().join("routing.json");
    std::fs::write(
        &routing,
        r#"[[{"to": "sink", "prob": "1/2"}, {"to": 2, "prob": "1/2"}], [{"to": 1, "prob": "1/1"}]]"#,
    )
    .unwrap();
    let presets: Vec<Vec<&str>> = vec![
        vec!["single-grain", "--path", "4"],
        vec!["single-grain", "--routing", s(&routing)],
        vec!["bssm", "--graph", s(&graph), "--p", "1/2"],
        vec![
            "bssm",
            "--graph",
            s(&graph),
            "--p",
            "1/1",
            "--null",
            "reject",
        ],
        vec![
            "paper-triangle-ssm",
            "--alpha",
            "1/4",
            "--beta",
            "1/4",
            "--gamma",
            "1/2",
            "--mu",
            "1/3",
        ],
        vec!["paper-triangle-asm", "--alpha", "2/3"],
    ];
    for (i, args) in presets.iter().enumerate() {
        let path = preset(&dir, &format!("p{i}.json"), args);
        ok(&["validate", s(&path)]);
    }
    assert_eq!(
        cli(&[
            "preset",
            "bssm",
            "--graph",
            s(&graph),
            "--p",
            "1/2",
            "--null",
            "reject"
        ])
        .exit_code(),
        1
    );
}

#[test]
fn schema_per_subcommand() {
    for sub in [
        "validate",
        "depth",
        "stabilize",
        "matrix",
        "stationary",
        "commute",
        "classes",
        "mu-independence",
        "simulate",
        "preset",
    ] {
        let payload = ok(&["--schema", sub]);
        assert!(payload.is_object(), "{sub}");
    }
    assert_eq!(cli(&["--schema", "nope"]).exit_code(), 2);
}

#[test]
fn binary_prints_an_envelope() {
    let dir = TempDir::new().unwrap();
    let t = triangle(&dir);
    let out = Command::new(env!("CARGO_BIN_EXE_stochsand"))
        .args(["validate", s(&t)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let envelope: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(envelope["status"], "ok");
    assert_eq!(envelope["diagnostics"], json!([]));
    let out = Command::new(env!("CARGO_BIN_EXE_stochsand"))
        .args(["preset", "paper-triangle-asm", "--alpha", "1/2"])
        .output()
        .unwrap();
    let model: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(model["n_sites"], 2);
    let out = Command::new(env!("CARGO_BIN_EXE_stochsand"))
        .arg("--nonsense")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_stochsand"))
        .arg("--version")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
