use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delpezzo"))
        .args(args)
        .env_remove("DELPEZZO_REFERENCE")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let o = run(&a);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn covers_dot_has_five_nodes() {
    let o = run(&["covers", "S1(D6+2A1)", "--format", "dot"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("digraph"));
    assert_eq!(s.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count(), 5);
}

#[test]
fn cris_order_48() {
    let v = json(&["cris", "S2(6A1)"]);
    assert_eq!(v["order"], "48");
    assert_eq!(v["name"], "C2xS4");
    assert!(!v["generators"].as_array().unwrap().is_empty());
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn degree_two_summary_has_fourteen_rows() {
    let v = json(&["accumulating", "--degree", "2"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 14);
}

#[test]
fn json_is_sorted_and_stable() {
    let a = stdout(&run(&["--format", "json", "covers", "S1(2A3+2A1)"]));
    let b = stdout(&run(&["--format", "json", "covers", "S1(2A3+2A1)"]));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let first = a.find("\"base\"").unwrap();
    assert!(first < a.find("\"edges\"").unwrap() && a.find("\"edges\"").unwrap() < a.find("\"schema_version\"").unwrap());
}

#[test]
fn user_errors_exit_one() {
    assert_eq!(run(&["verify", ""]).status.code(), Some(1));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(1));
    let o = run(&["pi1", "S4(2A1)"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("S4(2A1(8l))") && err.contains("S4(2A1(9l))"), "{err}");
    assert_eq!(run(&["pi1", "S4(E8)"]).status.code(), Some(1));
    assert_eq!(run(&["types", "--degree", "12"]).status.code(), Some(1));
    assert_eq!(run(&["--format", "dot", "types"]).status.code(), Some(1));
}

#[test]
fn missing_reference_is_a_user_error() {
    assert_eq!(run(&["verify", "types", "--reference", "/nonexistent/ref.json"]).status.code(), Some(1));
}

#[test]
fn verify_types_and_covers_pass() {
    for scope in ["types", "covers", "cris", "figures"] {
        let o = run(&["verify", scope]);
        assert_eq!(o.status.code(), Some(0), "{scope}: {}", stdout(&o));
        assert!(stdout(&o).contains("0 failed"));
    }
}

#[test]
fn verify_mismatch_exits_two() {
    let dir = std::env::temp_dir().join(format!("delpezzo-ref-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("reference.json");
    let text = include_str!("../data/reference.json").replacen("\"lines\": 4", "\"lines\": 5", 1);
    std::fs::write(&path, text).unwrap();
    let o = run(&["verify", "types", "--reference", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn cris_dot_draws_lines_as_boxes() {
    let s = stdout(&run(&["--format", "dot", "cris", "S2(D4+2A1)"]));
    assert!(s.contains("shape=box") && s.contains("shape=circle"));
}

#[test]
fn accumulating_dot_doubles_branched_nodes() {
    let s = stdout(&run(&["--format", "dot", "accumulating", "S2(A7)"]));
    assert_eq!(s.matches("doublecircle").count(), 4);
}
