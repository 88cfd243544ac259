use std::time::Instant;

use edray_core::graph::instances::double_ladder_dist;
use edray_core::graph::{canonical_generator, instance};
use edray_core::pipeline::{classify, run_theorem1, CaseTag, CaseTrace};
use serde_json::json;

fn run(name: &str, params: serde_json::Value, m: usize, h: usize) -> edray_core::pipeline::ExtractionResult {
    let g = instance(name, &params).unwrap();
    let gen = canonical_generator(name, &params).unwrap();
    let t = Instant::now();
    let out = run_theorem1(&g, gen.as_ref(), m, h).unwrap();
    eprintln!("{name} m={m} h={h}: {:?} in {:?}", out.case, t.elapsed());
    out
}

#[test]
fn classify_builtins() {
    let cases = [
        ("binary_tree", CaseTag::InfinitelyManyEnds),
        ("thick_ladder", CaseTag::OneThinEnd { end: 0 }),
        ("double_thick_ladder", CaseTag::TwoThinEnds { ends: [0, 1] }),
    ];
    for (name, want) in cases {
        let g = instance(name, &json!({})).unwrap();
        let (tag, audit) = classify(&g, 64).unwrap();
        assert_eq!(tag, want, "{name}: {audit:?}");
    }
}

#[test]
fn binary_tree_small() {
    let out = run("binary_tree", json!({}), 3, 32);
    assert_eq!(out.double_rays.len(), 3);
    assert!(out.audit.rays.edge_disjoint && out.audit.rays.simple);
}

#[test]
fn binary_tree_with_sibling_edges() {
    let out = run("binary_tree", json!({"sibling_edges": true}), 3, 32);
    assert_eq!(out.double_rays.len(), 3);
    match &out.trace {
        CaseTrace::Tree(t) => assert!(t.spanning_tree),
        other => panic!("unexpected trace {other:?}"),
    }
}

#[test]
fn thick_ladder_ten() {
    let out = run("thick_ladder", json!({}), 10, 300);
    assert_eq!(out.double_rays.len(), 10);
    assert!(out.audit.rays.edge_disjoint);
}

#[test]
fn double_ladder_ten() {
    let out = run("double_thick_ladder", json!({}), 10, 300);
    assert_eq!(out.case, CaseTag::TwoThinEnds { ends: [0, 1] });
    assert_eq!(out.double_rays.len(), 10);
    for d in &out.double_rays {
        let p = d.at(300);
        let far = |arm: &[edray_core::graph::VertexId]| arm.iter().map(double_ladder_dist).filter(|&d| d < usize::MAX / 4).max().unwrap_or(0);
        assert!(far(&p.left) >= 150 && far(&p.right) >= 150);
        let side = |arm: &[edray_core::graph::VertexId]| {
            let id = arm.last().unwrap().as_str().to_string();
            let parts: Vec<&str> = id.split(':').collect();
            let seg = if parts[0] == "m" { parts[2] } else { parts[1] };
            seg.starts_with('-')
        };
        assert_ne!(side(&p.left), side(&p.right), "arms must leave through different ends");
    }
}

#[test]
fn binary_tree_twenty_five() {
    let out = run("binary_tree", json!({}), 25, 64);
    assert_eq!(out.double_rays.len(), 25);
    assert!(out.audit.rays.edge_disjoint && out.audit.rays.simple);
    assert_eq!(out.stalls(), 0);
    let deeper = out.audit_at(128);
    assert!(deeper.edge_disjoint && deeper.simple);
}
