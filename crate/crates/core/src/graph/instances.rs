//! Built-in infinite graphs and their canonical double-ray families.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::lazy::{EndDecl, EndDegree, LazyGraph};
use super::vertex::{EdgeId, VertexId};
use crate::error::{Error, Result};
use crate::rays::{DoubleRayStream, FamilyGenerator, RayStream};

pub const DEFAULT_CORE_WIDTH: usize = 32;

/// Registered instance names with a one-line description, in listing order.
pub fn registered_instances() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "binary_tree",
            "rooted binary tree; infinitely many ends (param sibling_edges: bool)",
        ),
        (
            "double_thick_ladder",
            "two-sided ladder with widening parallel paths; two thin ends of degree 2 (param core_width)",
        ),
        (
            "figure2_graph",
            "two double rays joined by a single edge; four ends of degree 1",
        ),
        (
            "thick_ladder",
            "one-sided ladder with i+2 parallel paths on segment i; one thin end of degree 2",
        ),
    ]
}

/// Canonical family generator for a built-in instance, if it has one.
pub fn canonical_generator(name: &str, params: &Value) -> Result<Option<FamilyGenerator>> {
    match name {
        "thick_ladder" => Ok(Some(thick_ladder_generator())),
        "double_thick_ladder" => Ok(Some(double_ladder_generator(core_width(params)?))),
        "binary_tree" | "figure2_graph" => Ok(None),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}

/// Built-in instance by name. `params` may be `null` or an object.
pub fn instance(name: &str, params: &Value) -> Result<LazyGraph> {
    if !(params.is_null() || params.is_object()) {
        return Err(Error::Input(format!("params for {name} must be a JSON object")));
    }
    let g = match name {
        "thick_ladder" => {
            reject_params(name, params, &[])?;
            thick_ladder()
        }
        "double_thick_ladder" => {
            reject_params(name, params, &["core_width"])?;
            double_thick_ladder(core_width(params)?)
        }
        "binary_tree" => {
            reject_params(name, params, &["sibling_edges"])?;
            let siblings = match params.get("sibling_edges") {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(_) => return Err(Error::Input("sibling_edges must be a boolean".into())),
            };
            binary_tree(siblings)
        }
        "figure2_graph" => {
            reject_params(name, params, &[])?;
            figure2_graph()
        }
        other => return Err(Error::UnknownInstance(other.to_string())),
    };
    Ok(g.with_params(if params.is_null() {
        Value::Object(Default::default())
    } else {
        params.clone()
    }))
}

fn reject_params(name: &str, params: &Value, allowed: &[&str]) -> Result<()> {
    if let Some(obj) = params.as_object() {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Input(format!("unknown parameter `{key}` for {name}")));
            }
        }
    }
    Ok(())
}

fn core_width(params: &Value) -> Result<usize> {
    match params.get("core_width") {
        None => Ok(DEFAULT_CORE_WIDTH),
        Some(v) => match v.as_u64() {
            Some(w) if (1..=10_000).contains(&w) => Ok(w as usize),
            _ => Err(Error::Input("core_width must be an integer in 1..=10000".into())),
        },
    }
}

/// Instance spec file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub ends: Option<Vec<EndSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndSpec {
    pub id: usize,
    pub vertex_degree: EndDegree,
}

/// Builds the instance named by a spec and checks its end declarations.
pub fn instance_from_spec(spec: &InstanceSpec) -> Result<LazyGraph> {
    let g = instance(&spec.name, &spec.params)?;
    if let Some(ends) = &spec.ends {
        if g.infinitely_many_ends() {
            if !ends.is_empty() {
                return Err(Error::Metadata(format!(
                    "{} has infinitely many ends; no individual ends may be declared",
                    spec.name
                )));
            }
            return Ok(g);
        }
        let mut declared: Vec<(usize, EndDegree)> =
            ends.iter().map(|e| (e.id, e.vertex_degree)).collect();
        declared.sort_by_key(|e| e.0);
        let actual: Vec<(usize, EndDegree)> =
            g.ends().iter().map(|e| (e.end_id, e.vertex_degree)).collect();
        if declared != actual {
            return Err(Error::Metadata(format!(
                "declared ends {declared:?} do not match the instance rule {actual:?}"
            )));
        }
        if let Some(e) = ends.iter().find(|e| e.vertex_degree == EndDegree::Finite(0)) {
            return Err(Error::Input(format!("end {} has vertex degree 0", e.id)));
        }
    }
    Ok(g)
}

fn vid(s: String) -> VertexId {
    VertexId::new(s)
}

/// Splits `prefix:n1:n2...` into numeric fields.
fn fields(v: &VertexId, prefix: &str, arity: usize) -> Option<Vec<i64>> {
    let rest = v.as_str().strip_prefix(prefix)?.strip_prefix(':')?;
    let parts: Vec<i64> = rest
        .split(':')
        .map(|p| p.parse::<i64>().ok())
        .collect::<Option<_>>()?;
    (parts.len() == arity).then_some(parts)
}

/// Ray through `nth(0), nth(1), ...`, cut at the first vertex outside the ball.
fn clipped_ray<N, D>(nth: N, dist: D) -> RayStream
where
    N: Fn(usize) -> VertexId + Send + Sync + 'static,
    D: Fn(&VertexId) -> usize + Send + Sync + 'static,
{
    RayStream::from_fn(move |h| {
        let mut out = Vec::new();
        for k in 0.. {
            let v = nth(k);
            if dist(&v) > h {
                break;
            }
            out.push(v);
        }
        out
    })
}

// ---------------------------------------------------------------- thick ladder

/// Parallel paths on segment `i` of the one-sided ladder.
pub fn thick_ladder_width(i: i64) -> i64 {
    i + 3
}

fn thick_ladder() -> LazyGraph {
    let oracle = |v: &VertexId| -> Vec<VertexId> {
        for side in ["a", "b"] {
            if let Some(f) = fields(v, side, 1) {
                let i = f[0];
                if i < 0 {
                    return Vec::new();
                }
                let other = if side == "a" { "b" } else { "a" };
                let mut out = vec![vid(format!("{other}:{i}"))];
                if i > 0 {
                    for j in 0..thick_ladder_width(i - 1) {
                        out.push(vid(format!("m:{side}:{}:{j}", i - 1)));
                    }
                }
                for j in 0..thick_ladder_width(i) {
                    out.push(vid(format!("m:{side}:{i}:{j}")));
                }
                return out;
            }
        }
        if let Some(rest) = v.as_str().strip_prefix("m:") {
            let side = &rest[..1];
            if let Some(f) = fields(v, &format!("m:{side}"), 2) {
                let (i, j) = (f[0], f[1]);
                if i >= 0 && (0..thick_ladder_width(i)).contains(&j) && (side == "a" || side == "b") {
                    return vec![vid(format!("{side}:{i}")), vid(format!("{side}:{}", i + 1))];
                }
            }
        }
        Vec::new()
    };
    let a_spine = ladder_spine("a", 0, 0, 1, thick_ladder_dist);
    let b_spine = ladder_spine("b", 0, 0, 1, thick_ladder_dist);
    LazyGraph::new("thick_ladder", vid("a:0".into()), oracle).with_ends(vec![EndDecl {
        end_id: 0,
        vertex_degree: EndDegree::Finite(2),
        witness_rays: vec![a_spine, b_spine],
    }])
}

/// Root distance in the one-sided ladder, read off the id.
pub fn thick_ladder_dist(v: &VertexId) -> usize {
    let s = v.as_str();
    let num = |p: &str| p.parse::<usize>().unwrap_or(usize::MAX / 4);
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["a", i] => 2 * num(i),
        ["b", i] => 2 * num(i) + 1,
        ["m", "a", i, _] => 2 * num(i) + 1,
        ["m", "b", i, _] => 2 * num(i) + 2,
        _ => usize::MAX / 4,
    }
}

/// Spine ray on `side` starting at index `start`, stepping by `dir`, always
/// using parallel path `path` (segment index for a step from i to i+dir is
/// `min(i, i+dir)`).
fn ladder_spine(
    side: &'static str,
    start: i64,
    path: i64,
    dir: i64,
    dist: fn(&VertexId) -> usize,
) -> RayStream {
    clipped_ray(
        move |k| {
            let steps = (k / 2) as i64;
            let i = start + dir * steps;
            if k % 2 == 0 {
                vid(format!("{side}:{i}"))
            } else {
                let seg = if dir > 0 { i } else { i - 1 };
                vid(format!("m:{side}:{seg}:{path}"))
            }
        },
        dist,
    )
}

/// The rung family of the one-sided ladder: member `r` leaves rung `r` along
/// both spines using parallel path `r` on every segment.
pub fn thick_ladder_member(r: usize) -> DoubleRayStream {
    let r = r as i64;
    let center = EdgeId::new(vid(format!("a:{r}")), vid(format!("b:{r}"))).unwrap();
    DoubleRayStream::new(
        center,
        ladder_spine("a", r, r, 1, thick_ladder_dist),
        ladder_spine("b", r, r, 1, thick_ladder_dist),
    )
}

fn thick_ladder_generator() -> FamilyGenerator {
    let cache: Arc<std::sync::Mutex<Vec<DoubleRayStream>>> = Arc::default();
    FamilyGenerator::new("rung_fan", move |n| {
        let mut c = cache.lock().unwrap();
        while c.len() < n {
            let r = c.len();
            c.push(thick_ladder_member(r));
        }
        c[..n].to_vec()
    })
}

// --------------------------------------------------------- double thick ladder

fn double_width(core: usize, seg: i64) -> i64 {
    core as i64 + seg.abs()
}

fn double_thick_ladder(core: usize) -> LazyGraph {
    let oracle = move |v: &VertexId| -> Vec<VertexId> {
        for side in ["a", "b"] {
            if let Some(f) = fields(v, side, 1) {
                let i = f[0];
                let other = if side == "a" { "b" } else { "a" };
                let mut out = vec![vid(format!("{other}:{i}"))];
                for j in 0..double_width(core, i - 1) {
                    out.push(vid(format!("m:{side}:{}:{j}", i - 1)));
                }
                for j in 0..double_width(core, i) {
                    out.push(vid(format!("m:{side}:{i}:{j}")));
                }
                return out;
            }
        }
        for side in ["a", "b"] {
            if let Some(f) = fields(v, &format!("m:{side}"), 2) {
                let (i, j) = (f[0], f[1]);
                if (0..double_width(core, i)).contains(&j) {
                    return vec![vid(format!("{side}:{i}")), vid(format!("{side}:{}", i + 1))];
                }
            }
        }
        Vec::new()
    };
    let ends = vec![
        EndDecl {
            end_id: 0,
            vertex_degree: EndDegree::Finite(2),
            witness_rays: vec![
                ladder_spine("a", 0, 0, 1, double_ladder_dist),
                ladder_spine("b", 0, 0, 1, double_ladder_dist),
            ],
        },
        EndDecl {
            end_id: 1,
            vertex_degree: EndDegree::Finite(2),
            witness_rays: vec![
                ladder_spine("a", 0, 0, -1, double_ladder_dist),
                ladder_spine("b", 0, 0, -1, double_ladder_dist),
            ],
        },
    ];
    LazyGraph::new("double_thick_ladder", vid("a:0".into()), oracle).with_ends(ends)
}

/// Root distance in the two-sided ladder, read off the id.
pub fn double_ladder_dist(v: &VertexId) -> usize {
    let parts: Vec<&str> = v.as_str().split(':').collect();
    let num = |p: &str| p.parse::<i64>().ok();
    let far = usize::MAX / 4;
    match parts.as_slice() {
        ["a", i] => num(i).map_or(far, |i| 2 * i.unsigned_abs() as usize),
        ["b", i] => num(i).map_or(far, |i| 2 * i.unsigned_abs() as usize + 1),
        ["m", side, i, _] => num(i).map_or(far, |i| {
            let near = if i >= 0 { i } else { -(i + 1) } as usize;
            2 * near + if *side == "a" { 1 } else { 2 }
        }),
        _ => far,
    }
}

/// Member `r` of the two-sided family: a full spine on side `a` (even `r`)
/// or `b` (odd `r`), using parallel path `r / 2` on every segment.
pub fn double_ladder_member(r: usize) -> DoubleRayStream {
    let side = if r.is_multiple_of(2) { "a" } else { "b" };
    let p = (r / 2) as i64;
    let center = EdgeId::new(vid(format!("{side}:0")), vid(format!("m:{side}:0:{p}"))).unwrap();
    let left = ladder_spine(side, 0, p, -1, double_ladder_dist);
    let forward = ladder_spine(side, 0, p, 1, double_ladder_dist);
    DoubleRayStream::new(center, left, forward.tail(1))
}

fn double_ladder_generator(core: usize) -> FamilyGenerator {
    FamilyGenerator::new("parallel_spines", move |n| {
        (0..n.min(2 * core)).map(double_ladder_member).collect()
    })
}

// ----------------------------------------------------------------- binary tree

fn binary_tree(siblings: bool) -> LazyGraph {
    let oracle = move |v: &VertexId| -> Vec<VertexId> {
        let s = v.as_str();
        if s != "t" && !s.starts_with("t:") {
            return Vec::new();
        }
        let bits: Vec<&str> = s.split(':').skip(1).collect();
        if bits.iter().any(|b| *b != "0" && *b != "1") {
            return Vec::new();
        }
        let mut out = Vec::new();
        if let Some((last, _)) = bits.split_last() {
            out.push(vid(s[..s.len() - 2].to_string()));
            if siblings {
                let flip = if *last == "0" { "1" } else { "0" };
                out.push(vid(format!("{}:{flip}", &s[..s.len() - 2])));
            }
        }
        out.push(vid(format!("{s}:0")));
        out.push(vid(format!("{s}:1")));
        out
    };
    LazyGraph::new("binary_tree", vid("t".into()), oracle).with_infinitely_many_ends(true)
}

// ------------------------------------------------------------------- figure 2

fn figure2_graph() -> LazyGraph {
    let oracle = |v: &VertexId| -> Vec<VertexId> {
        for (side, other) in [("p", "q"), ("q", "p")] {
            if let Some(f) = fields(v, side, 1) {
                let i = f[0];
                let mut out = vec![
                    vid(format!("{side}:{}", i - 1)),
                    vid(format!("{side}:{}", i + 1)),
                ];
                if i == 0 {
                    out.push(vid(format!("{other}:0")));
                }
                return out;
            }
        }
        Vec::new()
    };
    let dist = |v: &VertexId| -> usize {
        let parts: Vec<&str> = v.as_str().split(':').collect();
        let i: i64 = parts.get(1).and_then(|p| p.parse().ok()).unwrap_or(i64::MAX / 4);
        i.unsigned_abs() as usize + usize::from(parts[0] == "q")
    };
    let ray = move |side: &'static str, dir: i64| {
        clipped_ray(move |k| vid(format!("{side}:{}", dir * k as i64)), dist)
    };
    let ends = vec![
        EndDecl {
            end_id: 0,
            vertex_degree: EndDegree::Finite(1),
            witness_rays: vec![ray("p", 1)],
        },
        EndDecl {
            end_id: 1,
            vertex_degree: EndDegree::Finite(1),
            witness_rays: vec![ray("p", -1)],
        },
        EndDecl {
            end_id: 2,
            vertex_degree: EndDegree::Finite(1),
            witness_rays: vec![ray("q", 1)],
        },
        EndDecl {
            end_id: 3,
            vertex_degree: EndDegree::Finite(1),
            witness_rays: vec![ray("q", -1)],
        },
    ];
    LazyGraph::new("figure2_graph", vid("p:0".into()), oracle).with_ends(ends)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::truncate;

    #[test]
    fn ladder_distances_match_bfs() {
        let g = instance("thick_ladder", &Value::Null).unwrap();
        let b = g.ball(20).unwrap();
        for v in b.graph.vertices() {
            assert_eq!(b.dist(v), Some(thick_ladder_dist(v)), "{v}");
        }
        let g = instance("double_thick_ladder", &serde_json::json!({"core_width": 3})).unwrap();
        let b = g.ball(14).unwrap();
        for v in b.graph.vertices() {
            assert_eq!(b.dist(v), Some(double_ladder_dist(v)), "{v}");
        }
    }

    #[test]
    fn small_truncations() {
        let g = instance("thick_ladder", &Value::Null).unwrap();
        let t0 = truncate(&g, 0).unwrap();
        assert_eq!(t0.vertex_count(), 1);
        assert_eq!(t0.edge_count(), 0);
        let tree = instance("binary_tree", &Value::Null).unwrap();
        let t2 = truncate(&tree, 2).unwrap();
        assert_eq!((t2.vertex_count(), t2.edge_count()), (7, 6));
    }

    #[test]
    fn members_are_clipped_to_the_ball() {
        let d = thick_ladder_member(2);
        let p = d.at(9);
        let names: Vec<&str> = p.left.iter().map(|v| v.as_str()).collect();
        assert_eq!(names, ["a:2", "m:a:2:2", "a:3", "m:a:3:2", "a:4", "m:a:4:2"]);
        assert_eq!(p.right.first().unwrap().as_str(), "b:2");
    }

    #[test]
    fn spec_errors() {
        assert!(matches!(
            instance("nope", &Value::Null),
            Err(Error::UnknownInstance(_))
        ));
        assert!(matches!(
            instance("thick_ladder", &serde_json::json!({"width": 3})),
            Err(Error::Input(_))
        ));
        let spec: InstanceSpec = serde_json::from_str(
            r#"{"name":"thick_ladder","params":{},"ends":[{"id":0,"vertex_degree":3}]}"#,
        )
        .unwrap();
        assert!(matches!(instance_from_spec(&spec), Err(Error::Metadata(_))));
        let spec: InstanceSpec = serde_json::from_str(
            r#"{"name":"double_thick_ladder","ends":[{"id":0,"vertex_degree":2},{"id":1,"vertex_degree":2}]}"#,
        )
        .unwrap();
        assert!(instance_from_spec(&spec).is_ok());
        let thick: InstanceSpec = serde_json::from_str(
            r#"{"name":"thick_ladder","ends":[{"id":0,"vertex_degree":"thick"}]}"#,
        )
        .unwrap();
        assert_eq!(thick.ends.unwrap()[0].vertex_degree, EndDegree::thick());
    }
}
