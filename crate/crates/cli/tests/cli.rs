use std::collections::BTreeSet;
use std::process::{Command, Output};

use edray_core::graph::{FiniteGraph, GraphExport};
use serde_json::Value;

fn edray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edray")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Minimal undirected DOT grammar: a quoted graph header, node and edge
/// statements with optional attribute lists, and a closing brace.
fn parse_dot(text: &str) -> Result<(BTreeSet<String>, Vec<(String, String, Option<String>)>), String> {
    fn quoted(s: &str) -> Option<(String, &str)> {
        let s = s.strip_prefix('"')?;
        let mut out = String::new();
        let mut chars = s.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => out.push(chars.next()?.1),
                '"' => return Some((out, &s[i + 1..])),
                _ => out.push(c),
            }
        }
        None
    }
    fn attrs(s: &str) -> Result<Option<String>, String> {
        let s = s.trim();
        let body = s.strip_suffix(';').ok_or(format!("missing `;` in {s:?}"))?.trim();
        if body.is_empty() {
            return Ok(None);
        }
        let inner = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or(format!("bad attribute list {body:?}"))?;
        let colour = inner.split(',').map(str::trim).find_map(|kv| kv.strip_prefix("color=")).map(str::to_string);
        Ok(colour)
    }
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty")?;
    let rest = header.strip_prefix("graph ").ok_or("not an undirected graph")?;
    let (_, tail) = quoted(rest).ok_or("unquoted graph name")?;
    if tail.trim() != "{" {
        return Err("missing `{`".into());
    }
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    let mut closed = false;
    for line in lines {
        let line = line.trim();
        if closed {
            return Err(format!("text after `}}`: {line}"));
        }
        if line == "}" {
            closed = true;
            continue;
        }
        let (a, tail) = quoted(line).ok_or(format!("bad statement {line:?}"))?;
        match tail.trim_start().strip_prefix("--") {
            Some(t) => {
                let (b, t) = quoted(t.trim_start()).ok_or(format!("bad edge {line:?}"))?;
                edges.push((a, b, attrs(t)?));
            }
            None => {
                attrs(tail)?;
                nodes.insert(a);
            }
        }
    }
    if !closed {
        return Err("missing `}`".into());
    }
    Ok((nodes, edges))
}

#[test]
fn list_is_stable_and_names_builtins() {
    let a = edray(&["list"]);
    assert!(a.status.success());
    let text = stdout(&a);
    assert!(text.contains("thick_ladder") && text.contains("binary_tree"));
    assert_eq!(text, stdout(&edray(&["list"])));
}

#[test]
fn extract_thick_ladder() {
    let o = edray(&["extract", "--instance", "thick_ladder", "--m", "10", "--horizon", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["double_rays"].as_array().unwrap().len(), 10);
    assert_eq!(v["audit"]["rays"]["edge_disjoint"], true);
}

#[test]
fn small_horizon_writes_partial_result_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.json");
    let o = edray(&[
        "extract", "--instance", "thick_ladder", "--m", "10", "--horizon", "5", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "needs_larger_horizon");
    assert!(v["achieved"].as_u64().unwrap() < 10);
}

#[test]
fn unknown_instance_exits_one() {
    let o = edray(&["extract", "--instance", "no_such_graph"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown-instance"));
}

#[test]
fn spec_file_with_wrong_end_degree_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"name": "thick_ladder", "ends": [{"id": 0, "vertex_degree": 3}]}"#).unwrap();
    let o = edray(&["extract", "--spec", spec.to_str().unwrap(), "--m", "2", "--horizon", "100"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("metadata-inconsistency"), "{}", stderr(&o));
}

#[test]
fn repeated_extraction_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.json"));
        let o = edray(&[
            "extract", "--instance", "double_thick_ladder", "--m", "4", "--horizon", "120", "--trace", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn verify_suite_passes() {
    let o = edray(&["verify", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn verify_connector_is_seed_reproducible() {
    let a = edray(&["verify", "connector", "--seed", "42", "--rounds", "100"]);
    let b = edray(&["verify", "connector", "--seed", "42", "--rounds", "100"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn corrupt_separator_fails_with_named_bullet() {
    let o = edray(&["verify", "capture", "--instance", "thick_ladder", "--corrupt", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("order equals the end's vertex degree"), "{}", stderr(&o));
}

#[test]
fn dot_export_parses_and_colours_each_ray() {
    let o = edray(&["export", "--instance", "thick_ladder", "--horizon", "40", "--m", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (nodes, edges) = parse_dot(&stdout(&o)).unwrap();
    for (a, b, _) in &edges {
        assert!(nodes.contains(a) && nodes.contains(b));
    }
    let colours: BTreeSet<&String> = edges.iter().filter_map(|e| e.2.as_ref()).collect();
    assert_eq!(colours.len(), 3);
}

#[test]
fn json_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("t.json");
    let o = edray(&[
        "export", "--instance", "binary_tree", "--horizon", "6", "--format", "json", "--out", first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&first).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let ex: GraphExport = serde_json::from_value(v["graph"].clone()).unwrap();
    let fg = FiniteGraph::from_export(&ex).unwrap();
    assert_eq!(fg.vertex_count(), 127);
    assert_eq!(fg.to_export(), ex);
    let again = edray(&["export", "--import", first.to_str().unwrap(), "--format", "json"]);
    assert_eq!(stdout(&again), text);
}
