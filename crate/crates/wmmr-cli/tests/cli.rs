use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wmmr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wmmr"))
}

fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../wmmr-core/corpus"))
}

fn run_ok(args: &[&str]) -> Output {
    let mut cmd = wmmr();
    cmd.args(args);
    cmd.output().expect("failed to launch wmmr")
}

#[test]
fn corpus_all_agree_exit_zero() {
    let out = run_ok(&["check", corpus_dir().to_str().unwrap(), "--engine", "both"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("[ok]").count(), 8, "{text}");
    assert!(!text.contains("MISMATCH"));
}

#[test]
fn json_report_matches_schema() {
    let out = run_ok(&["check", corpus_dir().to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).expect("invalid JSON");
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json"))
        .expect("schema parses");
    validate(&schema, &schema, &report, "$");
    assert_eq!(report["tests"].as_array().unwrap().len(), 8);
}

#[test]
fn parse_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lit");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "name: bad\nthread 1:\n  a := := x\nexists (a=0)").unwrap();
    let out = run_ok(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wrong_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("claim.lit");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(
        f,
        "name: claim\nlocations: x\nthread 1:\n  x := 1\n  a := x\n\
         exists (a=1)\nexpected: unreachable"
    )
    .unwrap();
    let out = run_ok(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));
}

#[test]
fn strict_flag_reports_bounded_unknown() {
    let lb = corpus_dir().join("LB.lit");
    let out = wmmr()
        .args(["check", lb.to_str().unwrap(), "--engine", "op", "--strict"])
        .env("WMMR_MAX_STATES", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn witness_prints_configuration() {
    let lb = corpus_dir().join("LB.lit");
    let out = run_ok(&["check", lb.to_str().unwrap(), "--engine", "proof", "--witness"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("configuration order:"), "{text}");
    assert!(text.contains("digraph"), "{text}");
    assert!(text.contains("[Ini]"), "{text}");
}

#[test]
fn reports_are_deterministic() {
    let strip = |out: Output| -> Value {
        let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
        for t in v["tests"].as_array_mut().unwrap() {
            t.as_object_mut().unwrap().remove("wall_ms");
        }
        v
    };
    let a = strip(run_ok(&["check", corpus_dir().to_str().unwrap(), "--json"]));
    let b = strip(run_ok(&["check", corpus_dir().to_str().unwrap(), "--json"]));
    assert_eq!(a, b);
}

#[test]
fn crosscheck_subcommand_passes() {
    let out = run_ok(&["crosscheck", "--seed", "5", "--count", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 discrepancies"), "{text}");
}

#[test]
fn crosscheck_zero_count() {
    let out = run_ok(&["crosscheck", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
}

/// Minimal JSON-schema checker covering the subset the shipped schema uses:
/// type, properties, required, additionalProperties, items, enum, $ref.
fn validate(root: &Value, schema: &Value, value: &Value, path: &str) {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let target = r
            .strip_prefix("#/")
            .unwrap()
            .split('/')
            .fold(root, |v, k| &v[k]);
        validate(root, target, value, path);
        return;
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "integer" => value.is_u64() || value.is_i64(),
            other => panic!("unsupported type {other}"),
        };
        assert!(ok, "{path}: expected {t}, got {value}");
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        assert!(allowed.contains(value), "{path}: {value} not in {allowed:?}");
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(req) = schema.get("required").and_then(Value::as_array) {
            for k in req {
                let k = k.as_str().unwrap();
                assert!(obj.contains_key(k), "{path}: missing required key {k}");
            }
        }
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            for k in obj.keys() {
                assert!(
                    props.is_some_and(|p| p.contains_key(k)),
                    "{path}: unexpected key {k}"
                );
            }
        }
        if let Some(props) = props {
            for (k, sub) in props {
                if let Some(v) = obj.get(k) {
                    validate(root, sub, v, &format!("{path}.{k}"));
                }
            }
        }
    }
    if let Some(arr) = value.as_array() {
        if let Some(items) = schema.get("items") {
            for (i, v) in arr.iter().enumerate() {
                validate(root, items, v, &format!("{path}[{i}]"));
            }
        }
    }
}
