// SPDX-License-Identifier: Apache-2.0
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use symcirc::corpus::{self, Gadget, RankTemplate};
use symcirc::io::serialize_circuit;
use symcirc::{Circuit, CircuitBuilder, StructuredFunction, Vocabulary};

fn symcirc(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_symcirc"));
    cmd.args(args).env_remove("SYMCIRC_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_circuit(dir: &Path, name: &str, c: &Circuit) -> String {
    write(dir, name, &serialize_circuit(c))
        .display()
        .to_string()
}

#[test]
fn compile_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("parity.json");
    let o = symcirc(
        &[
            "compile-sym",
            "--n",
            "3",
            "--cf",
            "0101",
            "-o",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let s = write(
        dir.path(),
        "s.json",
        r#"{"universe":["a","b","c"],"relations":{"X":[["a"],["c"]]}}"#,
    );
    let o = symcirc(
        &[
            "eval",
            out.to_str().unwrap(),
            "--structure",
            s.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"][0]["value"], Value::Bool(false));
    let s = write(
        dir.path(),
        "s1.json",
        r#"{"universe":["a","b","c"],"relations":{"X":[["b"]]}}"#,
    );
    let o = symcirc(
        &[
            "eval",
            out.to_str().unwrap(),
            "--structure",
            s.to_str().unwrap(),
            "--gamma",
            "a=3,b=1,c=2",
        ],
        &[],
    );
    assert_eq!(json(&o)["results"][0]["value"], Value::Bool(true));
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = serialize_circuit(&corpus::c_ex()).replace("\"OR\"", "\"XOR\"");
    let p = write(dir.path(), "bad.json", &text);
    let o = symcirc(&["validate", p.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("XOR"));
    let o = symcirc(&["compile-sym", "--n", "3", "--cf", "01"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(symcirc(&["no-such-command"], &[]).status.code(), Some(2));
}

#[test]
fn analysis_pipeline_on_example() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_circuit(dir.path(), "ex.json", &corpus::c_ex());
    assert_eq!(symcirc(&["validate", &c], &[]).status.code(), Some(0));
    assert_eq!(symcirc(&["transparent", &c], &[]).status.code(), Some(0));
    assert_eq!(symcirc(&["unique-labels", &c], &[]).status.code(), Some(0));
    let u = dir.path().join("u.json");
    assert_eq!(
        symcirc(&["normalize", &c, "-o", u.to_str().unwrap()], &[])
            .status
            .code(),
        Some(0)
    );
    let u = u.to_str().unwrap();
    assert_eq!(symcirc(&["unique-labels", u], &[]).status.code(), Some(0));
    assert_eq!(symcirc(&["symmetric", u], &[]).status.code(), Some(0));
    let o = symcirc(&["extend", u, "--perm", "2 1"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let images = json(&o)["images"].as_array().unwrap().clone();
    assert!(images.iter().any(|p| p[0] == "E(1,2)" && p[1] == "E(2,1)"));
    let o = symcirc(&["orbits", u], &[]);
    assert_eq!(json(&o)["orbits"]["E(1,2)"].as_array().unwrap().len(), 2);
    let o = symcirc(&["supports", u], &[]);
    assert_eq!(json(&o)["summary"]["max_norm"], 1);
    let o = symcirc(&["classes", &c], &[]);
    assert_eq!(json(&o)["classes"].as_array().unwrap().len(), 5);
    let o = symcirc(&["oracle", "truth-table", &c], &[]);
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 16);
    assert_eq!(symcirc(&["invariant", &c], &[]).status.code(), Some(0));
}

/// Rank gate reading the same child twice: not transparent.
fn opaque() -> Circuit {
    let mut b = CircuitBuilder::new(2, Vocabulary::new([("E", 2)]), 0);
    corpus::add_all_relational(&mut b);
    b.internal(
        "out",
        StructuredFunction::rank(1, 2, 1, 2).unwrap(),
        ["E(1,1)", "E(1,1)"],
    );
    b.output(vec![], "out");
    b.build().unwrap()
}

#[test]
fn preconditions() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_circuit(dir.path(), "opaque.json", &opaque());
    assert_eq!(symcirc(&["transparent", &c], &[]).status.code(), Some(1));
    assert_eq!(symcirc(&["unique-labels", &c], &[]).status.code(), Some(1));
    for cmd in ["classes", "quotient", "normalize", "orbits", "supports"] {
        assert_eq!(symcirc(&[cmd, &c], &[]).status.code(), Some(3), "{cmd}");
    }
    assert_eq!(
        symcirc(&["extend", &c, "--perm", "(1 2)"], &[])
            .status
            .code(),
        Some(3)
    );
    // The exhaustive search still works and finds the swap does not extend.
    assert_eq!(
        symcirc(&["oracle", "brute-aut", &c, "--perm", "(1 2)"], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(symcirc(&["symmetric", &c], &[]).status.code(), Some(1));
}

#[test]
fn budget_exceeded() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_circuit(dir.path(), "ex.json", &corpus::c_ex());
    assert_eq!(
        symcirc(&["invariant", &c], &[("SYMCIRC_BUDGET", "3")])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        symcirc(&["invariant", &c, "--max-budget", "3"], &[])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn graph_isomorphism_instances() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = write(dir.path(), "g1.json", r#"{"a":2,"b":2,"edges":[[1,1]]}"#);
    let g2 = write(
        dir.path(),
        "g2.json",
        r#"{"a":2,"b":2,"edges":[[1,1],[2,2]]}"#,
    );
    let (g1, g2) = (g1.to_str().unwrap(), g2.to_str().unwrap());
    assert_eq!(
        symcirc(&["oracle", "iso-check", "--b1", g1, "--b2", g2], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        symcirc(&["oracle", "iso-check", "--b1", g1, "--b2", g1], &[])
            .status
            .code(),
        Some(0)
    );
    let out = dir.path().join("sym.json");
    let o = symcirc(
        &[
            "gen-gi",
            "--kind",
            "sym",
            "--b1",
            g1,
            "--b2",
            g2,
            "-o",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        symcirc(&["symmetric", out.to_str().unwrap()], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        symcirc(&["gen-gi", "--kind", "xyz", "--b1", g1, "--b2", g2], &[])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lowering_with_tables() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_circuit(dir.path(), "ex.json", &corpus::c_ex());
    let t = write(dir.path(), "t.json", r#"{"out": "01010"}"#);
    let o = symcirc(&["lower", &c, "--tables", t.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["gates"].as_array().unwrap().len() > 5);
    let t = write(dir.path(), "t2.json", r#"{"out": "011"}"#);
    assert_eq!(
        symcirc(&["lower", &c, "--tables", t.to_str().unwrap()], &[])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn rank_evaluation_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = symcirc::normalize::to_unique_labels(&corpus::rank_template(
        RankTemplate::Grid,
        Gadget::Plain,
        5,
        1,
        2,
    ))
    .unwrap();
    let c = write_circuit(dir.path(), "grid.json", &c);
    let s = write(
        dir.path(),
        "s.json",
        r#"{"universe":["a","b","c","d","e"],"relations":{"E":[["a","b"],["b","c"],["c","a"],["d","d"]]}}"#,
    );
    let o = symcirc(
        &[
            "rank-eval",
            &c,
            "--gate",
            "rank",
            "--structure",
            s.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json(&o);
    assert_eq!(v["agreement"], serde_json::json!([true]));
    let report = &v["reports"][0];
    assert_eq!(report["rank_direct"], 4);
    assert_eq!(report["value_direct"], false);
}
