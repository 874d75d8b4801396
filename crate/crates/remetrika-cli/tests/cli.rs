//! Exit-code contract and schema conformance of the emitted reports.

use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_remetrika"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("remetrika-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

// ---------------------------------------------------------------------------
// A minimal JSON-Schema walker covering the subset the shipped schemas use:
// type, enum, oneOf, properties, required, items, additionalProperties.

fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(variants) = schema.get("oneOf").and_then(Value::as_array) {
        let mut errors = Vec::new();
        for v in variants {
            match validate(v, value, path) {
                Ok(()) => return Ok(()),
                Err(e) => errors.push(e),
            }
        }
        return Err(format!("{path}: no oneOf variant matched ({errors:?})"));
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in {allowed:?}"));
        }
        return Ok(());
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => return Err(format!("{path}: unsupported schema type {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {value}"));
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing required key {key}"));
                }
            }
        }
        for (key, sub) in obj {
            let sub_path = format!("{path}.{key}");
            if let Some(prop_schema) = props.and_then(|p| p.get(key)) {
                validate(prop_schema, sub, &sub_path)?;
            } else {
                match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        return Err(format!("{path}: unexpected key {key}"))
                    }
                    Some(Value::Bool(true)) | None => {}
                    Some(extra_schema) => validate(extra_schema, sub, &sub_path)?,
                }
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, item) in arr.iter().enumerate() {
            validate(items, item, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_valid(schema_file: &str, value: &Value) {
    let schema_path = format!(
        "{}/../../docs/schemas/{schema_file}",
        env!("CARGO_MANIFEST_DIR")
    );
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(&schema_path).unwrap()).unwrap();
    if let Err(e) = validate(&schema, value, "$") {
        panic!("document violates {schema_file}: {e}\n{value:#}");
    }
}

// ---------------------------------------------------------------------------

#[test]
fn exit_codes_are_stable() {
    // 0: success.
    assert_eq!(run(&["check", "T2"]).status.code(), Some(0));
    // 1: mathematical gate failures.
    assert_eq!(run(&["check", "T3"]).status.code(), Some(1));
    assert_eq!(run(&["metric", "T3"]).status.code(), Some(1));
    assert_eq!(run(&["remetrize", "T3"]).status.code(), Some(1));
    assert_eq!(run(&["bessaga", "T3"]).status.code(), Some(1));
    assert_eq!(run(&["wong", "T1"]).status.code(), Some(1));
    // 2: input errors.
    let bad = temp_file("bad.json", "{ not json");
    assert_eq!(
        run(&["check", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let out_of_range = temp_file(
        "range.json",
        r#"{"type":"finite","points":2,"maps":[[2,0]]}"#,
    );
    assert_eq!(
        run(&["check", out_of_range.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["render", "T1"]).status.code(), Some(2));
    for p in [bad, out_of_range] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn state_cap_env_is_honored() {
    let output = bin()
        .args(["check", "T2"])
        .env("REMETRIKA_STATE_CAP", "3")
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("budget"), "{stderr}");
}

#[test]
fn check_reports_validate_against_schema() {
    for name in ["T1", "T2", "T3", "T4", "T5"] {
        let output = run(&["check", name]);
        let value: Value = serde_json::from_slice(&output.stdout).unwrap();
        assert_valid("check.schema.json", &value);
    }
}

#[test]
fn certificate_validates_against_schema() {
    for args in [
        vec!["remetrize", "T2"],
        vec!["remetrize", "T5", "--single", "--float"],
    ] {
        let output = run(&args);
        assert_eq!(output.status.code(), Some(0), "{args:?}");
        let value: Value = serde_json::from_slice(&output.stdout).unwrap();
        assert_valid("certificate.schema.json", &value);
    }
}

#[test]
fn verify_report_validates_against_schema() {
    for name in ["T1", "T2", "T4"] {
        let output = run(&["verify", name, "--depth", "3"]);
        assert_eq!(output.status.code(), Some(0), "{name}");
        let value: Value = serde_json::from_slice(&output.stdout).unwrap();
        assert_valid("verify.schema.json", &value);
        assert_eq!(value["all_pass"], Value::Bool(true));
    }
}

#[test]
fn unbounded_report_validates_against_schema() {
    let chain = temp_file(
        "chain.json",
        r#"{"type":"finite","points":4,"maps":[[0,0,1,2]]}"#,
    );
    let output = run(&[
        "unbounded",
        chain.to_str().unwrap(),
        "--x1",
        "[0,1]",
        "--a",
        "1/2",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let value: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_valid("unbounded.schema.json", &value);
    assert_eq!(value["D"][3][2], "4");
    let _ = std::fs::remove_file(chain);
}

#[test]
fn fixture_documents_validate_against_schema() {
    use remetrika::instance::{fixtures, serialize_instance, sierpinski, Instance};
    for fx in fixtures() {
        let text = serialize_instance(&Instance::Finite(fx.instance));
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_valid("instance.schema.json", &value);
    }
    let text = serialize_instance(&Instance::Affine2d(sierpinski()));
    let value: Value = serde_json::from_str(&text).unwrap();
    assert_valid("instance.schema.json", &value);
}

#[test]
fn metric_csv_matches_spec_example() {
    let output = run(&["metric", "T2", "--mu", "geometric:1/2"]);
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    let first_row: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(first_row[1], "1/2");
    // Depth 0 leaves only the whole space: all off-diagonal entries 1.
    let output = run(&["metric", "T2", "--mu", "geometric:1/2", "--depth", "0"]);
    let text = String::from_utf8(output.stdout).unwrap();
    for (i, line) in text.lines().enumerate() {
        for (j, cell) in line.split(',').enumerate() {
            assert_eq!(cell, if i == j { "0" } else { "1" });
        }
    }
}

#[test]
fn mu_file_specifier_round_trips() {
    let mu = temp_file(
        "mu.json",
        r#"{"prefix":["1","1/2"],"block_len":1,"ratio":"1/2"}"#,
    );
    let spec = format!("file:{}", mu.display());
    let output = run(&["metric", "T2", "--mu", &spec]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let _ = std::fs::remove_file(mu);
}

#[test]
fn remetrize_phi_csv_export() {
    let path = std::env::temp_dir().join(format!("remetrika-phi-{}.csv", std::process::id()));
    let output = bin()
        .args(["remetrize", "T1", "--phi-csv"])
        .arg(&path)
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,value,slope\n"));
    // T1's synthesized slope is the ratio of consecutive scales at index 7.
    assert!(csv.contains("510/511"), "{csv}");
    let _ = std::fs::remove_file(path);
}
