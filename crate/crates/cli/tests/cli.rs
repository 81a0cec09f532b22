use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tgw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tgw")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = tgw(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tgw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn all_pass(r: &Value) -> bool {
    r["certificates"].as_array().unwrap().iter().all(|c| c["pass"] == true)
}

#[test]
fn dlo_has_three_binary_types() {
    let r = report(&["--theory", "dlo", "types", "--vars", "2"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "types");
    assert_eq!(r["theory"], "dlo");
    assert_eq!(r["items"].as_array().unwrap().len(), 3);
    assert!(all_pass(&r));
    for key in ["parameters", "certificates", "timing"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn pureset_level_one_axioms() {
    let r = report(&["--theory", "pureset", "groupoid", "verify", "--level", "1"]);
    assert!(!r["certificates"].as_array().unwrap().is_empty());
    assert!(all_pass(&r));
}

#[test]
fn composition_example() {
    let r = report(&["--theory", "pureset", "compose", "--phi", "eq(x0,y0)", "--psi", "eq(y0,z1)"]);
    assert_eq!(r["items"]["chi"], "eq(x0,z1)");
    let names: Vec<&str> =
        r["certificates"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("table composition")), "{names:?}");
    assert!(all_pass(&r));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let args = ["--theory", "dlo", "section", "--steps", "2"];
    let mut a = report(&args);
    let mut b = report(&args);
    a["timing"] = Value::Null;
    b["timing"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn json_flag_writes_the_report_to_a_file() {
    let path = scratch("verify.json");
    let out = tgw(&["--theory", "dlo", "groupoid", "verify", "--level", "1", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["theory"], "dlo");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("pass") || l.starts_with("FAIL")), "{text}");
}

#[test]
fn config_file_supplies_defaults() {
    let path = scratch("run.json");
    std::fs::write(&path, r#"{"theory": "equivinf", "level": 1}"#).unwrap();
    let r = report(&["--config", path.to_str().unwrap(), "groupoid", "verify"]);
    assert_eq!(r["theory"], "equivinf");
    // Flags win over the file.
    let r = report(&["--config", path.to_str().unwrap(), "--theory", "pureset", "groupoid", "verify"]);
    assert_eq!(r["theory"], "pureset");

    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"theroy": "dlo"}"#).unwrap();
    assert_eq!(tgw(&["--config", bad.to_str().unwrap(), "types", "--vars", "1"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = tgw(&["--theory", "dlo", "types", "--vars", "2", "--constraint", "lt(x0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 6"));
    assert_eq!(tgw(&["--theory", "foo", "types", "--vars", "1"]).status.code(), Some(2));
    assert_eq!(tgw(&["--theory", "dlo", "nonsense"]).status.code(), Some(2));
}

#[test]
fn resource_limits_exit_with_three() {
    let out = tgw(&["--theory", "randomgraph", "--max-grid", "2", "types", "--vars", "5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn subgroupoids_and_skolem() {
    let r = report(&["--theory", "equivinf", "subgroupoids", "--depth", "1"]);
    let text = r["items"].to_string();
    assert!(text.contains("equiv(x0,y0)"), "{text}");
    let r = report(&["--theory", "dlo", "skolem", "--formula", "lt(x0,y0)"]);
    assert!(all_pass(&r));
}

#[test]
fn model_dump_lists_facts() {
    let r = report(&["--theory", "dlo", "model", "dump", "--size", "4"]);
    assert_eq!(r["items"]["carrier"].as_array().unwrap().len(), 4);
}
