use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use f2::{run_suite, CliError, RunConfig};
use f2core::export::{block_from_json, block_to_json, structure_from_json};

fn f2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_f2")).args(args).env_remove("F2_LEVEL_CAP").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const A: &str = r#"{"components":[{"id":0,"origin":["a","b"],"level":1}],"gluing":[]}"#;
const B: &str = r#"{"components":[{"id":0,"origin":["a","b"],"level":2}],"gluing":[]}"#;
const C: &str =
    r#"{"components":[{"id":0,"origin":["a","b"],"level":1},{"id":1,"origin":["a","b"],"level":1}],"gluing":[]}"#;
// Two copies of the same block glued along their shared E-edge.
const GLUED_EDGE: &str = r#"{"components":[{"id":0,"origin":["a","b"],"level":1},{"id":1,"origin":["a","b"],"level":1}],
  "gluing":[[[0,"a"],[1,"a"]],[[0,"b"],[1,"b"]]]}"#;

#[test]
fn unknown_suite_is_a_config_error() {
    assert!(matches!(run_suite("nope", &RunConfig::default()), Err(CliError::UnknownSuite(_))));
    assert_eq!(f2(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = f2(&["verify", "--suite", "sticks", "--trials", "5", "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS sticks"));
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(parsed[0]["trials"], 5);
    assert_eq!(parsed[0]["format"], "f2-report/1");
}

#[test]
fn verify_lists_suites() {
    let o = f2(&["verify", "--list"]);
    assert_eq!(stdout(&o).lines().count(), f2::SUITES.len());
}

#[test]
fn ext_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ext.json");
    assert!(f2(&["ext", "a", "b", "--level", "1", "--out", out.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(&out).unwrap();
    let g = block_from_json(&text).unwrap();
    assert_eq!(g.vertices.len(), 6);
    assert_eq!(block_to_json(&g), text);
}

#[test]
fn ext_dot_marks_c_edges() {
    let o = f2(&["ext", "a", "b", "--format", "dot"]);
    let dot = stdout(&o);
    assert!(dot.starts_with("graph block"));
    assert_eq!(dot.matches("dashed").count(), 2);
}

#[test]
fn level_cap_from_environment() {
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_f2"))
            .args(["ext", "a", "b", "--level", "2"])
            .env("F2_LEVEL_CAP", cap)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(2));
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("two").status.code(), Some(2));
    assert_eq!(f2(&["ext", "a", "b", "--level", "5"]).status.code(), Some(2));
}

#[test]
fn word_commands() {
    assert!(stdout(&f2(&["primitive", "abAB"])).starts_with("abAB: not primitive"));
    assert!(stdout(&f2(&["basis", "ab", "b"])).contains("Nielsen: true"));
    assert_eq!(stdout(&f2(&["cpath", "a", "baB"])).trim(), "a ~ baB");
    assert_eq!(f2(&["cpath", "a", "bab"]).status.code(), Some(2));
    assert_eq!(f2(&["primitive", "axc"]).status.code(), Some(2));
}

#[test]
fn admissible_validate() {
    let dir = tempfile::tempdir().unwrap();
    let good = f2(&["admissible", "validate", "--in", &write(dir.path(), "a.json", A)]);
    assert_eq!(good.status.code(), Some(0));
    assert!(stdout(&good).contains("removable: [0]"));
    let bad = f2(&["admissible", "validate", "--in", &write(dir.path(), "bad.json", GLUED_EDGE)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("\"condition\": 7"));
    let missing = dir.path().join("missing.json");
    assert_eq!(f2(&["admissible", "validate", "--in", missing.to_str().unwrap()]).status.code(), Some(2));
    let garbage = write(dir.path(), "garbage.json", "{\"components\": 3}");
    assert_eq!(f2(&["admissible", "validate", "--in", &garbage]).status.code(), Some(2));
}

#[test]
fn admissible_amalgamate_and_chain() {
    let dir = tempfile::tempdir().unwrap();
    let [a, b, c] = [("a.json", A), ("b.json", B), ("c.json", C)].map(|(n, t)| write(dir.path(), n, t));
    let out = dir.path().join("d.json");
    let o = f2(&["admissible", "amalgamate", "--in", &a, &b, &c, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let d = structure_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let levels: Vec<(usize, u32)> = d.components().map(|c| (c.id, c.level)).collect();
    assert_eq!(levels, [(0, 2), (1, 1)]);

    let chain = f2(&["admissible", "chain", "--in", &a, &b]);
    assert_eq!(chain.status.code(), Some(0));
    assert_eq!(stdout(&chain), "B0: 0@1\nB1: 0@2\n");
}
