use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tropicurve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn corpus_file(dir: &Path, name: &str, genus: &str) -> PathBuf {
    let out = run(&["corpus", name, "--genus", genus]);
    assert!(out.status.success());
    let path = dir.join(format!("{name}{genus}.json"));
    fs::write(&path, &out.stdout).unwrap();
    path
}

fn write_graph(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn genus_and_rank() {
    let dir = tempfile::tempdir().unwrap();
    let theta = corpus_file(dir.path(), "theta", "2");
    let theta = theta.to_str().unwrap();
    assert_eq!(json(&run(&["genus", "--graph", theta]))["genus"], 2);
    let r = json(&run(&["rank", "--graph", theta, "--divisor", "2*(P) + 1*(Q)"]));
    assert_eq!(r["rank"], 1);
    let k = json(&run(&["rank", "--graph", theta, "--divisor", "K"]));
    assert_eq!(k["rank"], 1);
}

#[test]
fn reduce_with_oracle_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let g = corpus_file(dir.path(), "c2", "3");
    let g = g.to_str().unwrap();
    let witness = dir.path().join("w.json");
    let out = json(&run(&[
        "reduce",
        "--graph",
        g,
        "--divisor",
        "3*(R) - 1*(P) + 1*(loop@1/2)",
        "--base",
        "P",
        "--witness",
        witness.to_str().unwrap(),
        "--oracle-check",
    ]));
    assert_eq!(out["oracle"], "agrees");
    assert!(out["phases"].is_u64());
    let w: Value = serde_json::from_str(&fs::read_to_string(&witness).unwrap()).unwrap();
    assert!(w["edges"]["loop"].is_array());
}

#[test]
fn invalid_graph_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_graph(
        dir.path(),
        "zero.json",
        r#"{"vertices":["P","Q"],"edges":[{"id":"e1","ends":["P","Q"],"length":"0"}]}"#,
    );
    let out = run(&["genus", "--graph", &zero]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("e1"));
    let split = write_graph(
        dir.path(),
        "split.json",
        r#"{"vertices":["A","B","C","D"],"edges":[{"id":"a","ends":["A","B"],"length":1},{"id":"b","ends":["C","D"],"length":1}]}"#,
    );
    assert_eq!(run(&["genus", "--graph", &split]).status.code(), Some(2));
    let theta = corpus_file(dir.path(), "theta", "2");
    let out = run(&["rank", "--graph", theta.to_str().unwrap(), "--divisor", "1*(e1@9/2)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["rank"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn trace_plot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let g = corpus_file(dir.path(), "banana", "3");
    let g = g.to_str().unwrap();
    let plot = |name: &str| {
        let path = dir.path().join(name);
        let out = json(&run(&["trace", "--graph", g, "--divisor", "K", "--edge", "e2", "--emit-plot", path.to_str().unwrap()]));
        assert!(!out["segments"].as_array().unwrap().is_empty());
        fs::read(path).unwrap()
    };
    let (a, b) = (plot("a.tsv"), plot("b.tsv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t\tt_decimal\tchip1"));
}

#[test]
fn weierstrass_locus_of_banana() {
    let dir = tempfile::tempdir().unwrap();
    let g = corpus_file(dir.path(), "banana", "3");
    let tsv = dir.path().join("locus.tsv");
    let out = json(&run(&["weierstrass", "--graph", g.to_str().unwrap(), "--emit-plot", tsv.to_str().unwrap()]));
    assert_eq!(out["intervals"].as_object().unwrap().len(), 4);
    let text = fs::read_to_string(tsv).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("interval")).count(), 4);
}

#[test]
fn canonical_and_very_ample() {
    let dir = tempfile::tempdir().unwrap();
    for (name, case) in [("banana", "C.I"), ("c2", "C.II"), ("c2p", "C.II'"), ("c3", "C.III"), ("k4", "VeryAmple")] {
        let g = corpus_file(dir.path(), name, "3");
        let out = json(&run(&["canonical", "--graph", g.to_str().unwrap()]));
        assert_eq!(out["case"], case, "{name}");
    }
    let g = corpus_file(dir.path(), "banana", "2");
    let out = json(&run(&["very-ample", "--graph", g.to_str().unwrap(), "--divisor", "2*(P) + 2*(Q)"]));
    assert_eq!(out["very_ample"], false);
    assert_eq!(out["witness"], serde_json::json!(["P", "Q"]));
    let circle = corpus_file(dir.path(), "circle", "1");
    let out = run(&["canonical", "--graph", circle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rr_check_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let g = corpus_file(dir.path(), "theta", "2");
    let g = g.to_str().unwrap();
    let a = run(&["rr-check", "--graph", g, "--seed", "7", "--count", "5"]);
    let b = run(&["rr-check", "--graph", g, "--seed", "7", "--count", "5"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["holds"], true);
    let given = json(&run(&["rr-check", "--graph", g, "--divisor", "K", "--divisor", "-1*(P)"]));
    assert_eq!(given["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn lin_equiv_and_corpus_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = corpus_file(dir.path(), "circle", "1");
    let g = g.to_str().unwrap();
    let out = json(&run(&["lin-equiv", "--graph", g, "--d1", "2*(c@1/4)", "--d2", "1*(O) + 1*(c@1/2)"]));
    assert_eq!(out["equivalent"], true);
    let out = json(&run(&["lin-equiv", "--graph", g, "--d1", "(O)", "--d2", "(c@1/2)"]));
    assert_eq!(out["equivalent"], false);
    let names = json(&run(&["corpus"]));
    assert!(names.as_array().unwrap().iter().any(|n| n == "c3"));
    assert_eq!(run(&["corpus", "nonsense"]).status.code(), Some(2));
}
