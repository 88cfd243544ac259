//! Seeded verification suites: connector fuzzing, capture audits, strand
//! audits and shaping selection checks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::connectors::{finite_connector, ConnectorResult};
use crate::error::Result;
use crate::extraction::{double_rays_stream, shaping_select, Shaping};
use crate::graph::{canonical_generator, instance, EdgeId, FiniteGraph, LazyGraph, VertexId};
use crate::rays::FamilyGenerator;
use crate::separations::{capture_end, verify_capture, CapturingSequence, Separation, Side};

/// Outcome of one named check over a number of cases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub pass: bool,
    pub failures: Vec<String>,
}

impl CheckReport {
    fn new(name: impl Into<String>, cases: usize, failures: Vec<String>) -> Self {
        CheckReport {
            name: name.into(),
            cases,
            pass: failures.is_empty(),
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// A connector input: a connected graph, a terminal set and a valid family.
#[derive(Debug, Clone)]
pub struct ConnectorCase {
    pub graph: FiniteGraph,
    pub terminals: BTreeSet<VertexId>,
    pub family: Vec<Vec<EdgeId>>,
}

fn v(i: usize) -> VertexId {
    VertexId::from(format!("v{i}"))
}

/// Random connected graph on at most `max_vertices` vertices with a family of
/// pairwise edge-disjoint connected members, each grown from a terminal.
pub fn random_connector_case(rng: &mut impl Rng, max_vertices: usize) -> ConnectorCase {
    let n = rng.gen_range(2..=max_vertices.max(2));
    let mut edges: BTreeSet<EdgeId> = BTreeSet::new();
    for i in 1..n {
        edges.insert(EdgeId::new(v(rng.gen_range(0..i)), v(i)).unwrap());
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if let Some(e) = EdgeId::new(v(a), v(b)) {
            edges.insert(e);
        }
    }
    let graph = FiniteGraph::from_edges(edges.iter().cloned());
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let terminals: BTreeSet<VertexId> = order[..rng.gen_range(1..=n.min(6))].iter().map(|&i| v(i)).collect();
    let starts: Vec<VertexId> = terminals.iter().cloned().collect();
    let mut used: BTreeSet<EdgeId> = BTreeSet::new();
    let mut family = Vec::new();
    for _ in 0..rng.gen_range(0..=8) {
        let mut seen = vec![starts.choose(rng).unwrap().clone()];
        let mut member = Vec::new();
        for _ in 0..rng.gen_range(1..=6) {
            let x = seen.choose(rng).unwrap().clone();
            let free: Vec<EdgeId> = graph
                .neighbors(&x)
                .filter_map(|y| EdgeId::new(x.clone(), y.clone()))
                .filter(|e| !used.contains(e))
                .collect();
            let Some(e) = free.choose(rng).cloned() else { continue };
            used.insert(e.clone());
            let y = e.other(&x).unwrap().clone();
            if !seen.contains(&y) {
                seen.push(y);
            }
            member.push(e);
        }
        if !member.is_empty() {
            family.push(member);
        }
    }
    ConnectorCase { graph, terminals, family }
}

/// Checks a connector against its contract without trusting the construction.
pub fn check_connector(case: &ConnectorCase, result: &ConnectorResult) -> Vec<String> {
    let mut out = Vec::new();
    let t = &result.tree;
    if let Some(s) = case.terminals.iter().find(|s| !t.contains(s)) {
        out.push(format!("terminal {s} missing from the connector"));
    }
    if !t.is_connected() {
        out.push("connector is disconnected".into());
    }
    for e in t.edges() {
        let (a, b) = e.endpoints();
        if !case.graph.has_edge(a, b) {
            out.push(format!("connector edge {e} is not in the graph"));
        }
    }
    let bound = 2 * case.terminals.len() - 2;
    if result.touched.len() > bound {
        out.push(format!("{} members touched, bound {bound}", result.touched.len()));
    }
    let tree_edges: BTreeSet<EdgeId> = t.edges().into_iter().collect();
    for (i, member) in case.family.iter().enumerate() {
        let shared = member.iter().any(|e| tree_edges.contains(e));
        if shared && !result.touched.contains(&i) {
            out.push(format!("member {i} shares an edge but is not reported as touched"));
        }
    }
    out
}

/// `rounds` seeded connector cases on at most 40 vertices.
pub fn connector_fuzz(seed: u64, rounds: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for round in 0..rounds {
        let case = random_connector_case(&mut rng, 40);
        match finite_connector(&case.graph, &case.terminals, &case.family) {
            Ok(r) => failures.extend(check_connector(&case, &r).into_iter().map(|f| format!("round {round}: {f}"))),
            Err(e) => failures.push(format!("round {round}: {e}")),
        }
    }
    CheckReport::new("connector", rounds, failures)
}

/// Copy of `sep` with one side-A neighbour of its separator moved into the
/// separator, raising its order by one.
pub fn corrupt_separation(sep: &Separation) -> Result<Separation> {
    let fg = &sep.ball().graph;
    let a_side: BTreeSet<VertexId> = fg.vertices().iter().filter(|x| sep.side_of(x) == Side::A).cloned().collect();
    let extra = sep
        .separator()
        .iter()
        .flat_map(|x| fg.neighbors(x))
        .find(|y| a_side.contains(*y))
        .cloned();
    let mut separator = sep.separator().to_vec();
    let mut a_side = a_side;
    if let Some(y) = extra {
        a_side.remove(&y);
        separator.push(y);
    }
    Separation::from_sides(sep.ball().clone(), separator, &a_side)
}

/// Captures `count` separations of `end` and verifies the five conditions,
/// optionally after corrupting separation `corrupt`.
pub fn capture_check(g: &LazyGraph, end: usize, count: usize, horizon: usize, corrupt: Option<usize>) -> Result<CheckReport> {
    let mut seq = capture_end(g, end, count, horizon)?;
    if let Some(i) = corrupt {
        let mut seps = seq.seps.clone();
        let i = i.min(seps.len().saturating_sub(1));
        seps[i] = corrupt_separation(&seps[i])?;
        seq = CapturingSequence::new(seps, seq.end_id, seq.k);
    }
    let report = verify_capture(&seq, g, horizon)?;
    let failures = report
        .bullets
        .iter()
        .filter(|b| !b.pass)
        .map(|b| match &b.witness {
            Some(w) => format!("{}: {w}", b.bullet),
            None => b.bullet.clone(),
        })
        .collect();
    Ok(CheckReport::new(format!("capture:{}", g.name()), seq.len(), failures))
}

/// Strand audits recorded while extracting `m` double rays around `end`.
pub fn strand_check(g: &LazyGraph, end: usize, gen: &FamilyGenerator, m: usize, horizon: usize) -> Result<CheckReport> {
    let (_, _, trace) = double_rays_stream(g, end, gen, m, horizon)?;
    let mut failures = Vec::new();
    let audits = &trace.two_rays.strands;
    for a in audits {
        for (side, (deg, par)) in a.degrees.iter().zip(&a.parity).enumerate() {
            failures.extend(deg.violations.iter().map(|x| format!("strand {}.{side}: {x}", a.index)));
            if !par.holds || par.degree_one % 2 == 0 {
                failures.push(format!(
                    "strand {}.{side}: {} degree-one vertices against lvr {} and rvl {}",
                    a.index, par.degree_one, par.lvr, par.rvl
                ));
            }
        }
    }
    Ok(CheckReport::new(format!("strands:{}", g.name()), 2 * audits.len(), failures))
}

/// Random shaping levels: level `i` holds `i` shapings of `width` indices.
pub fn random_shaping_levels(rng: &mut impl Rng, levels: usize, width: usize, c1: u32, c2: u32) -> Vec<Vec<Shaping>> {
    (1..=levels)
        .map(|i| {
            (0..i)
                .map(|_| {
                    let mut single: Vec<Option<u32>> =
                        (0..width).map(|_| (!rng.gen_bool(0.2)).then(|| rng.gen_range(0..c1))).collect();
                    if single.iter().all(Option::is_none) {
                        single[rng.gen_range(0..width)] = Some(rng.gen_range(0..c1));
                    }
                    let pair: Vec<u32> = (0..width * width).map(|_| rng.gen_range(0..c2)).collect();
                    Shaping::new(single, |a, b| pair[a * width + b])
                })
                .collect()
        })
        .collect()
}

/// Random shaping windows; every selection is re-checked against both bullets.
pub fn shaping_fuzz(seed: u64, rounds: usize) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for round in 0..rounds {
        let levels = rng.gen_range(2..=12);
        let width = rng.gen_range(2..=6);
        let d = random_shaping_levels(&mut rng, levels, width, 2, 2);
        let want = rng.gen_range(1..=3);
        match shaping_select(&d, want) {
            Ok(sel) => failures.extend(sel.verify(&d).into_iter().map(|f| format!("round {round}: {f}"))),
            Err(e) if e.is_horizon() => {}
            Err(e) => failures.push(format!("round {round}: {e}")),
        }
    }
    CheckReport::new("shaping", rounds, failures)
}

/// The full suite on the built-in instances.
pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let ladder = instance("thick_ladder", &serde_json::Value::Null)?;
    let gen = canonical_generator("thick_ladder", &serde_json::Value::Null)?.expect("thick_ladder has a generator");
    let checks = vec![
        connector_fuzz(seed, 200),
        capture_check(&ladder, 0, 10, 200, None)?,
        strand_check(&ladder, 0, &gen, 3, 150)?,
        shaping_fuzz(seed, 200),
    ];
    Ok(SuiteReport { seed, checks })
}
