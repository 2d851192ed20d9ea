use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use synchro::{parse_automaton, Word};

const C4: &str = "4 2\na 2 3 4 1\nb 2 2 3 4\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synchro"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Enough of JSON Schema for the shipped report schema: `$ref`, `oneOf`,
/// `type`, `enum`, `required`, `properties`, `items`, `minimum`.
fn conforms(v: &Value, schema: &Value, root: &Value) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.trim_start_matches("#/$defs/");
        return conforms(v, &root["$defs"][name], root);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let matching = options
            .iter()
            .filter(|s| conforms(v, s, root).is_ok())
            .count();
        return if matching == 1 {
            Ok(())
        } else {
            Err(format!("{matching} oneOf branches match"))
        };
    }
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let actual = match v {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        if !types.contains(&actual) && !(actual == "integer" && types.contains(&"number")) {
            return Err(format!("expected {types:?}, found {actual}"));
        }
        if actual == "null" {
            return Ok(());
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            return Err(format!("{v} not in {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (schema.get("minimum").and_then(Value::as_i64), v.as_i64()) {
        if x < min {
            return Err(format!("{x} < {min}"));
        }
    }
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for key in req.iter().filter_map(Value::as_str) {
            if v.get(key).is_none() {
                return Err(format!("missing `{key}`"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (
        schema.get("properties").and_then(Value::as_object),
        v.as_object(),
    ) {
        for (key, sub) in props {
            if let Some(x) = obj.get(key) {
                conforms(x, sub, root).map_err(|e| format!("{key}: {e}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            conforms(x, items, root).map_err(|e| format!("[{i}]: {e}"))?;
        }
    }
    Ok(())
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_c4() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c4.txt", C4);
    let r = json(&["--json", "analyze", f.to_str().unwrap(), "--exact"]);
    assert_eq!(r["cone"]["dim_k_limit"], 3);
    assert_eq!(r["cone"]["trans_len_k"], 3);
    assert_eq!(r["bounds"]["bound_main"], 9);
    assert_eq!(r["bounds"]["rt_exact"], 9);
    assert_eq!(r["bounds"]["bound_rystsov"], 15);
    assert_eq!(r["bounds"]["bound_rystsov_prefix"], 13);
    assert_eq!(r["growth"]["d"], 1);
    assert_eq!(r["perm_set"], serde_json::json!(["a"]));
    let s = schema();
    conforms(&r, &s, &s).unwrap();
}

#[test]
fn text_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c4.txt", C4);
    let text = String::from_utf8(run(&["analyze", f.to_str().unwrap()]).stdout).unwrap();
    let r = json(&["--json", "analyze", f.to_str().unwrap()]);
    for (key, value) in r["bounds"].as_object().unwrap() {
        let expected = match value {
            Value::Null => "-".to_string(),
            Value::Object(_) => continue,
            other => other.to_string(),
        };
        assert!(text.contains(&format!("  {key}: {expected}\n")), "{key}");
    }
    assert!(text.contains("word: b a a a b a a a b\n"));
}

#[test]
fn json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c4.txt", C4);
    let out = run(&["--json", "synthesize", f.to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    let s = schema();
    conforms(&v, &s, &s).unwrap();
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "2 1\na 1 3\n");
    let out = run(&["rt", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 10);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 5"));

    let perms = write(dir.path(), "perms.txt", "2 2\ns 2 1\nt 1 2\n");
    assert_eq!(code(&run(&["analyze", perms.to_str().unwrap()])), 11);

    // synchronizing, but (1 2) alone is not transitive on four states
    let nt = write(dir.path(), "nt.txt", "4 2\na 2 1 3 4\nz 3 3 3 3\n");
    let out = run(&["synthesize", nt.to_str().unwrap()]);
    assert_eq!(code(&out), 12);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not-transitive"));

    let c4 = write(dir.path(), "c4.txt", C4);
    assert_eq!(
        code(&run(&["analyze", c4.to_str().unwrap(), "--perm-set", "b"])),
        15
    );
    assert_eq!(
        code(&run(&["rt", c4.to_str().unwrap(), "--subset-cap", "3"])),
        13
    );
    assert_eq!(
        code(&run(&["analyze", c4.to_str().unwrap(), "--group-cap", "2"])),
        0
    );
    assert_eq!(code(&run(&["generate", "cerny", "--n", "1"])), 16);
    assert_eq!(code(&run(&["rt", "/nonexistent/file"])), 17);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn synthesize_c8() {
    let text = String::from_utf8(run(&["generate", "cerny", "--n", "8"]).stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c8.txt", &text);
    let r = json(&["--json", "synthesize", f.to_str().unwrap()]);
    let len = r["length"].as_u64().unwrap();
    assert!(len <= 49);
    assert_eq!(r["bound_main"], 49);
    let aut = parse_automaton(&text).unwrap();
    let names: Vec<&str> = r["word"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    let w: Word = aut.word_from_names(&names.join(" ")).unwrap();
    assert_eq!(w.len() as u64, len);
    assert!(aut.is_reset_word(&w).unwrap());
}

#[test]
fn rt_from_stdin() {
    use std::io::Write;
    let mut child = bin()
        .args(["--json", "rt", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(C4.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rt"], 9);
    assert_eq!(v["witness"].as_array().unwrap().len(), 9);
}

#[test]
fn verify_suites() {
    let r = json(&["--json", "verify", "--suite", "cerny", "--n", "8"]);
    assert_eq!(r["passed"], true);
    assert_eq!(r["reports"][0]["instances"], 7);

    let r = json(&[
        "--json",
        "verify",
        "--suite",
        "enumerate",
        "--n",
        "3",
        "--letters",
        "2",
    ]);
    assert_eq!(r["passed"], true);
    assert_eq!(r["reports"][0]["instances"], 729);

    let out = bin()
        .args([
            "--json",
            "--seed",
            "5",
            "verify",
            "--suite",
            "lemmas",
            "--n",
            "8",
            "--seed-count",
            "4",
        ])
        .env("SYNCHRO_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 5);
    assert_eq!(r["reports"][0]["instances"], 4);
    assert_eq!(r["reports"][0]["failures"], serde_json::json!([]));
    let s = schema();
    conforms(&r, &s, &s).unwrap();

    let r = json(&[
        "--json",
        "verify",
        "--suite",
        "oracles",
        "--seed-count",
        "60",
    ]);
    assert_eq!(r["passed"], true);
    assert_eq!(r["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn generate_round_trips() {
    let out = run(&["generate", "cerny", "--n", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "5 2\na 2 3 4 5 1\nb 2 2 3 4 5\n");
    assert_eq!(parse_automaton(&text).unwrap().to_string(), text);

    let first = run(&["--seed", "7", "generate", "random-st", "--n", "6"]);
    let second = run(&["generate", "random-st", "--n", "6", "--seed", "7"]);
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&first.stderr).contains("seed: 7"));
    let aut = parse_automaton(std::str::from_utf8(&first.stdout).unwrap()).unwrap();
    assert_eq!(aut.n(), 6);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("all.txt");
    let out = run(&[
        "generate",
        "enumerate",
        "--n",
        "2",
        "--letters",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.split("\n\n").count(), 4);
    for chunk in text.split("\n\n") {
        parse_automaton(chunk).unwrap();
    }
}
