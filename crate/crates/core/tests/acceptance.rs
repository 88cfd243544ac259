//! Acceptance criteria 1 to 10, one pass/fail line each.

mod common;

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;
use std::time::{Duration, Instant};

use common::shaping_oracle::{exists, random_levels, single_codes};
use common::strand_families::{lemma_violations, ShapeCache};
use edray_core::connectors::finite_connector;
use edray_core::extraction::{check_parity, check_strand_degrees, shaping_select, two_rays_stream, Shaping};
use edray_core::graph::instances::double_ladder_dist;
use edray_core::graph::{canonical_generator, instance, EdgeId, FiniteGraph, LazyGraph, VertexId};
use edray_core::pipeline::suite::{random_connector_case, ConnectorCase};
use edray_core::pipeline::{one_ended_double_rays, run_theorem1, two_ended_double_rays, CaseTrace};
use edray_core::rays::{pairwise_edge_disjoint, DoubleRayStream, FamilyGenerator};
use edray_core::separations::{capture_end, subsequence, verify_capture};
use edray_core::shapes::{c1, c2, enumerate_allowed_links, enumerate_shapes, enumerate_two_shapes, is_allowed_link, Letter, Word};
use edray_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SEED: u64 = 2024;

/// Checks passed, a one-line summary and the JSON artifact of the run.
type Outcome = Result<(String, Value), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ladder() -> (LazyGraph, FamilyGenerator) {
    let g = instance("thick_ladder", &Value::Null).unwrap();
    let gen = canonical_generator("thick_ladder", &Value::Null).unwrap().unwrap();
    (g, gen)
}

fn connected(fg: &FiniteGraph) -> bool {
    let n = fg.vertex_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for &y in fg.adj(x) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn connector_case_ok(case: &ConnectorCase) -> Result<Value, String> {
    let r = finite_connector(&case.graph, &case.terminals, &case.family).map_err(|e| e.to_string())?;
    let t = &r.tree;
    ensure(connected(t), || "connector is disconnected".into())?;
    ensure(case.terminals.iter().all(|s| t.contains(s)), || "terminal missing".into())?;
    let bound = 2 * case.terminals.len() - 2;
    ensure(r.touched.len() <= bound, || format!("{} touched, bound {bound}", r.touched.len()))?;
    let tree_edges: BTreeSet<EdgeId> = t.edges().into_iter().collect();
    for (i, member) in case.family.iter().enumerate() {
        if !r.touched.contains(&i) {
            ensure(member.iter().all(|e| !tree_edges.contains(e)), || {
                format!("untouched member {i} shares an edge")
            })?;
        }
    }
    Ok(serde_json::to_value(r.export()).unwrap())
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for round in 0..200 {
        let case = random_connector_case(&mut rng, 40);
        out.push(connector_case_ok(&case).map_err(|e| format!("round {round}: {e}"))?);
    }
    Ok(("200 connectors within the 2|S|-2 bound".into(), Value::Array(out)))
}

fn criterion_2() -> Outcome {
    let (g, _) = ladder();
    let seq = capture_end(&g, 0, 10, 200).map_err(|e| e.to_string())?;
    ensure(seq.len() == 10, || format!("{} separations", seq.len()))?;
    let orders: Vec<usize> = seq.seps.iter().map(|s| s.order()).collect();
    ensure(orders.iter().all(|&k| k == 2), || format!("orders {orders:?}"))?;
    let report = verify_capture(&seq, &g, 200).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("failed bullets {:?}", report.failed()))?;
    for mask in 1u32..1 << seq.len() {
        let idx: Vec<usize> = (0..seq.len()).filter(|i| mask >> i & 1 == 1).collect();
        let sub = subsequence(&seq, &idx).map_err(|e| e.to_string())?;
        let r = verify_capture(&sub, &g, 200).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("subsequence {idx:?} fails {:?}", r.failed()))?;
    }
    Ok((
        "orders all 2, five bullets hold on all 1023 subsequences".into(),
        serde_json::to_value(seq.export()).unwrap(),
    ))
}

/// Every word over `vertices` using each vertex at most once.
fn all_link_words(vertices: &[VertexId]) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier: Vec<(Vec<VertexId>, Vec<Letter>)> = vertices.iter().map(|v| (vec![v.clone()], vec![])).collect();
    while let Some((vs, ls)) = frontier.pop() {
        if let Ok(w) = Word::new(vs.clone(), ls.clone()) {
            out.push(w);
        }
        for v in vertices.iter().filter(|v| !vs.contains(v)) {
            for l in [Letter::L, Letter::M, Letter::R] {
                let mut vs = vs.clone();
                let mut ls = ls.clone();
                vs.push(v.clone());
                ls.push(l);
                frontier.push((vs, ls));
            }
        }
    }
    out
}

fn criterion_3() -> Outcome {
    ensure(c1(1) == 3, || format!("c1(1) = {}", c1(1)))?;
    let pair = [VertexId::new("u"), VertexId::new("v")];
    let shapes: Vec<String> = enumerate_shapes(&pair).unwrap().iter().map(|s| s.to_string()).collect();
    let want = ["ε", "u", "v", "u l v", "u r v", "v l u", "v r u"];
    ensure(shapes == want, || format!("shapes {shapes:?}"))?;
    let (c1_2, c2_2) = (c1(2), c2(2).map_err(|e| e.to_string())?);
    ensure((c1_2, c2_2) == (15, 2), || format!("c1(2) = {c1_2}, c2(2) = {c2_2}"))?;
    let listed = enumerate_two_shapes(&[VertexId::new("u"), VertexId::new("v")]).unwrap().len() as u64;
    ensure(listed == c1_2, || format!("{listed} two-shapes enumerated against c1(2) = {c1_2}"))?;
    let x1 = [VertexId::new("x:0"), VertexId::new("x:1")];
    let x2 = [VertexId::new("y:0"), VertexId::new("y:1")];
    let words = all_link_words(&[x1.clone(), x2.clone()].concat());
    let mut links = 0;
    for s1 in enumerate_shapes(&x1).unwrap() {
        for s2 in enumerate_shapes(&x2).unwrap() {
            let listed: BTreeSet<String> = enumerate_allowed_links(&s1, &s2).iter().map(|w| w.to_string()).collect();
            let allowed: BTreeSet<String> = words
                .iter()
                .filter(|w| is_allowed_link(w, &s1, &s2).is_empty())
                .map(|w| w.to_string())
                .collect();
            ensure(listed == allowed, || format!("{s1} / {s2}: listed {listed:?}, allowed {allowed:?}"))?;
            links += listed.len();
        }
    }
    Ok((
        format!("c1(1)=3, 7 shapes, c1(2)={c1_2}, c2(2)={c2_2}, {links} links closed both ways"),
        json!({"shapes": shapes, "c1_2": c1_2, "c2_2": c2_2, "links": links}),
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut cache = ShapeCache::new();
    let mut out = Vec::new();
    for round in 0..1000 {
        let len = rng.gen_range(1..=5);
        let fam = cache.draw(&mut rng, 2 + round % 3, len);
        let violations = lemma_violations(&fam);
        ensure(violations.is_empty(), || format!("round {round}: {violations:?}"))?;
        let report = check_strand_degrees(&fam.strand);
        let parity = check_parity(&fam.strand);
        ensure(report.passed() && parity.holds, || format!("round {round}: {:?} {parity:?}", report.violations))?;
        ensure(parity.lvr == parity.rvl + 1 && parity.degree_one == parity.lvr + parity.rvl, || {
            format!("round {round}: {parity:?}")
        })?;
        out.push(json!([parity.lvr, parity.rvl, parity.degree_one]));
    }
    Ok(("1000 strands: degree <= 2, odd ends, #lvr - #rvl = 1".into(), Value::Array(out)))
}

fn criterion_5() -> Outcome {
    let (g, gen) = ladder();
    let streams = two_rays_stream(&g, 0, &gen, 10, 300).map_err(|e| e.to_string())?;
    ensure(streams.len() == 10, || format!("{} 2-rays", streams.len()))?;
    let early: Vec<_> = streams.iter().map(|s| s.at(300)).collect();
    ensure(early.iter().all(|p| p.is_vertex_disjoint()), || "a 2-ray meets itself".into())?;
    ensure(pairwise_edge_disjoint(early.iter().map(|p| p.edges())), || "2-rays share an edge".into())?;
    let late: Vec<_> = streams.iter().map(|s| s.at(600)).collect();
    ensure(late.iter().zip(&early).all(|(l, e)| l.extends(e)), || "prefix at 600 does not extend 300".into())?;
    let artifact = early.iter().map(|p| json!({"first": p.first, "second": p.second})).collect();
    Ok(("10 edge-disjoint 2-rays, stable from 300 to 600".into(), Value::Array(artifact)))
}

fn double_ray_checks(rays: &[DoubleRayStream], h: usize) -> Result<Value, String> {
    let prefixes: Vec<_> = rays.iter().map(|d| d.at(h)).collect();
    ensure(prefixes.iter().all(|p| p.is_simple()), || "a double ray is not simple".into())?;
    ensure(pairwise_edge_disjoint(prefixes.iter().map(|p| p.edges())), || "double rays share an edge".into())?;
    Ok(Value::Array(rays.iter().map(|d| serde_json::to_value(d.export(h)).unwrap()).collect()))
}

fn criterion_6() -> Outcome {
    let (g, gen) = ladder();
    let (rays, cp, trace) = one_ended_double_rays(&g, 0, &gen, 10, 300).map_err(|e| e.to_string())?;
    ensure(rays.len() == 10, || format!("{} double rays", rays.len()))?;
    let at_300 = double_ray_checks(&rays, 300)?;
    let regions: BTreeSet<usize> = trace.extraction.plan.entries.iter().map(|e| e.separator).collect();
    ensure(regions.len() == 10, || format!("rung regions {regions:?}"))?;
    let at_600 = double_ray_checks(&rays, 600)?;
    ensure(rays.iter().all(|d| d.at(600).extends(&d.at(300))), || "prefix at 600 does not extend 300".into())?;
    ensure(cp.stalls() == 0, || format!("{} stalls", cp.stalls()))?;
    Ok((
        "10 edge-disjoint double rays through distinct rung regions, stable to 600".into(),
        json!({"300": at_300, "600": at_600}),
    ))
}

fn ladder_side(v: &VertexId) -> bool {
    let parts: Vec<&str> = v.as_str().split(':').collect();
    let seg = if parts[0] == "m" { parts[2] } else { parts[1] };
    seg.starts_with('-')
}

fn criterion_7() -> Outcome {
    let g = instance("double_thick_ladder", &Value::Null).unwrap();
    let gen = canonical_generator("double_thick_ladder", &Value::Null).unwrap().unwrap();
    let (rays, _, _) = two_ended_double_rays(&g, [0, 1], &gen, 10, 300).map_err(|e| e.to_string())?;
    ensure(rays.len() == 10, || format!("{} double rays", rays.len()))?;
    let artifact = double_ray_checks(&rays, 300)?;
    for (i, d) in rays.iter().enumerate() {
        let p = d.at(300);
        let depth = |arm: &[VertexId]| arm.iter().map(double_ladder_dist).filter(|&x| x < usize::MAX / 4).max().unwrap_or(0);
        ensure(depth(&p.left) >= 150 && depth(&p.right) >= 150, || {
            format!("ray {i}: depths {} and {}", depth(&p.left), depth(&p.right))
        })?;
        ensure(ladder_side(p.left.last().unwrap()) != ladder_side(p.right.last().unwrap()), || {
            format!("ray {i}: both arms leave through one end")
        })?;
    }
    Ok(("10 edge-disjoint double rays reaching depth 150 on both ends".into(), artifact))
}

fn criterion_8() -> Outcome {
    let g = instance("binary_tree", &Value::Null).unwrap();
    let result = run_theorem1(&g, None, 25, 64).map_err(|e| e.to_string())?;
    ensure(result.double_rays.len() == 25, || format!("{} double rays", result.double_rays.len()))?;
    let artifact = double_ray_checks(&result.double_rays, result.horizon_used)?;
    let CaseTrace::Tree(trace) = &result.trace else {
        return Err("not routed to the tree case".into());
    };
    for (i, s) in trace.steps.iter().enumerate() {
        ensure(s.residual_branches >= 3, || format!("step {i}: {} residual branches", s.residual_branches))?;
    }
    Ok(("25 edge-disjoint double rays, residual keeps >= 3 branches".into(), artifact))
}

fn shaping_round(d: &[Vec<Shaping>], width: usize, want: usize) -> Result<Value, String> {
    let expected = exists(d, width, want, &[0, 1], &[0, 1]);
    match shaping_select(d, want) {
        Ok(sel) => {
            let bad = sel.verify(d);
            ensure(bad.is_empty(), || format!("bullets fail: {bad:?}"))?;
            ensure(expected, || "selection where the oracle finds none".into())?;
            Ok(json!({"levels": sel.levels, "indices": sel.indices, "sets": sel.sets}))
        }
        Err(Error::NeedsLargerHorizon { achieved, .. }) => {
            ensure(!expected, || format!("oracle finds length {want}, selection stops at {achieved}"))?;
            Ok(json!({"achieved": achieved}))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn criterion_9() -> Outcome {
    let mut out = Vec::new();
    let mut exhaustive = 0;
    for width in [2, 3] {
        let mut shapings = Vec::new();
        for single in single_codes(width) {
            let pairs: Vec<u32> = if width == 2 { vec![0, 1] } else { vec![0] };
            for p in pairs {
                shapings.push(Shaping::new(single.clone(), move |_, _| p));
            }
        }
        for a in &shapings {
            for b in &shapings {
                for c in &shapings {
                    let d = vec![vec![a.clone()], vec![b.clone(), c.clone()]];
                    for want in 1..=2 {
                        shaping_round(&d, width, want)?;
                        exhaustive += 1;
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for round in 0..500 {
        let levels = rng.gen_range(2..=12);
        let width = rng.gen_range(2..=6);
        let want = rng.gen_range(1..=3);
        let d = random_levels(&mut rng, levels, width, 2, 2);
        out.push(shaping_round(&d, width, want).map_err(|e| format!("round {round}: {e}"))?);
    }
    Ok((
        format!("{exhaustive} exhaustive and 500 random windows agree with the oracle"),
        Value::Array(out),
    ))
}

type Criterion = fn() -> Outcome;

const CRITERIA: [(&str, Criterion, Duration); 9] = [
    ("connector bound", criterion_1, Duration::from_secs(5)),
    ("capturing sequences", criterion_2, Duration::from_secs(2)),
    ("shape enumeration", criterion_3, Duration::from_secs(60)),
    ("strand lemmas", criterion_4, Duration::from_secs(30)),
    ("ray extraction", criterion_5, Duration::from_secs(10)),
    ("one-ended end-to-end", criterion_6, Duration::from_secs(15)),
    ("two-ended end-to-end", criterion_7, Duration::from_secs(15)),
    ("tree case", criterion_8, Duration::from_secs(5)),
    ("shapings", criterion_9, Duration::from_secs(60)),
];

fn report(line: String) {
    // written past the test harness capture so the lines always show
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut artifacts = Vec::new();
    for (i, (name, run, budget)) in CRITERIA.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let took = started.elapsed();
        let line = match &outcome {
            Ok((detail, _)) if took <= *budget => format!("criterion {}: PASS {name} ({took:.2?}): {detail}", i + 1),
            Ok((detail, _)) => format!("criterion {}: FAIL {name} ({took:.2?} over {budget:?}): {detail}", i + 1),
            Err(e) => format!("criterion {}: FAIL {name} ({took:.2?}): {e}", i + 1),
        };
        if line.contains(": FAIL ") {
            failed.push(i + 1);
        }
        report(line);
        artifacts.push(outcome.ok().map(|(_, a)| serde_json::to_string(&a).unwrap()));
    }

    let started = Instant::now();
    let mut differs = Vec::new();
    for (i, (_, run, _)) in CRITERIA.iter().enumerate() {
        let again = run().ok().map(|(_, a)| serde_json::to_string(&a).unwrap());
        if again != artifacts[i] || again.is_none() {
            differs.push(i + 1);
        }
    }
    let took = started.elapsed();
    if differs.is_empty() {
        report(format!("criterion 10: PASS determinism ({took:.2?}): artifacts of 1-9 byte-identical on re-run"));
    } else {
        report(format!("criterion 10: FAIL determinism ({took:.2?}): criteria {differs:?} differ or failed"));
        failed.push(10);
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
