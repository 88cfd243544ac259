//! Two distinct thin ends: rays from a common last vertex on either side,
//! joined by an edge-disjoint path system between the subdivided ray unions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    components, edge_disjoint_paths, min_vertex_cut, min_vertex_cut_avoiding, Ball, EdgeId, FiniteGraph, LazyGraph,
    PathPacking, VertexId,
};
use crate::rays::{
    edge_disjoint_rays_from, rays_from_starts, refine_mutual_intersection, Checkpoints, DoubleRayStream,
    FamilyGenerator, PathRun, RayStream,
};

/// Prefix marking subdivision vertices.
const SUBDIVISION: &str = "~";

#[derive(Debug, Clone, Serialize)]
pub struct TwoEndedTrace {
    pub ends: [usize; 2],
    pub separator: Vec<VertexId>,
    /// Common last vertices in the separator towards either end.
    pub last_vertices: [VertexId; 2],
    /// Family members per pair of last vertices.
    pub pair_counts: Vec<(VertexId, VertexId, usize)>,
    /// Family members not reaching both ends within the horizon.
    pub unconverged: usize,
    /// Rays from either last vertex, and those kept as pairwise meeting.
    pub hosts: [usize; 2],
    pub meeting: [Vec<usize>; 2],
    /// Edge-disjoint paths between the subdivided ray unions.
    pub path_system: usize,
    /// Rays with distinct starts chosen on either side.
    pub starts: [usize; 2],
}

fn deep_witnesses(ball: &Ball, g: &LazyGraph, end: usize) -> Result<BTreeSet<VertexId>> {
    let h = ball.radius();
    let decl = g
        .end(end)
        .ok_or_else(|| Error::Metadata(format!("end {end} is not declared")))?;
    let deep: BTreeSet<VertexId> = decl
        .witness_rays
        .iter()
        .flat_map(|r| r.at(h).iter().cloned().collect::<Vec<_>>())
        .filter(|v| ball.dist(v).is_some_and(|d| 2 * d >= h))
        .collect();
    if deep.is_empty() {
        return Err(Error::horizon(format!("witness rays of end {end} past half the horizon"), 0, Some(2 * h.max(1))));
    }
    Ok(deep)
}

/// Minimum vertex cut between the deep parts of two ends' witness rays, taken
/// within the least root distance that admits a cut of minimum order.
pub fn end_separator(g: &LazyGraph, ball: &Ball, a: usize, b: usize) -> Result<BTreeSet<VertexId>> {
    let fg = &ball.graph;
    let (src, snk) = (deep_witnesses(ball, g, a)?, deep_witnesses(ball, g, b)?);
    if !src.is_disjoint(&snk) {
        return Err(Error::Metadata(format!("witness rays of ends {a} and {b} share deep vertices")));
    }
    let order = min_vertex_cut(fg, &src, &snk)?.order();
    for r in 0..=ball.radius() {
        let far: BTreeSet<VertexId> = fg.vertices().iter().filter(|v| ball.dist(v).unwrap() > r).cloned().collect();
        if let Ok(c) = min_vertex_cut_avoiding(fg, &src, &snk, &far) {
            if c.order() == order {
                return Ok(c.cut);
            }
        }
    }
    Err(Error::Metadata(format!("no cut separates ends {a} and {b}")))
}

fn sub_id(e: &EdgeId) -> VertexId {
    let (u, v) = e.endpoints();
    VertexId::new(format!("{SUBDIVISION}{u}|{v}"))
}

fn is_sub(v: &VertexId) -> bool {
    v.as_str().starts_with(SUBDIVISION)
}

/// The ray with every edge subdivided.
fn subdivided(r: &RayStream) -> RayStream {
    let r = r.clone();
    RayStream::from_fn(move |h| {
        let p = r.at(h);
        let mut out = Vec::with_capacity(2 * p.len());
        for (i, v) in p.iter().enumerate() {
            if i > 0 {
                out.push(sub_id(&EdgeId::new(p[i - 1].clone(), v.clone()).unwrap()));
            }
            out.push(v.clone());
        }
        out
    })
}

/// Shortest path from `s` to `t` in the union of `paths`, least ids first.
fn union_path(paths: &[&[VertexId]], s: &VertexId, t: &VertexId) -> Option<Vec<VertexId>> {
    let mut adj: BTreeMap<&VertexId, BTreeSet<&VertexId>> = BTreeMap::new();
    for p in paths {
        for w in p.windows(2) {
            adj.entry(&w[0]).or_default().insert(&w[1]);
            adj.entry(&w[1]).or_default().insert(&w[0]);
        }
    }
    let mut prev: HashMap<&VertexId, &VertexId> = HashMap::new();
    let mut queue = VecDeque::from([s]);
    let mut seen = HashSet::from([s]);
    while let Some(x) = queue.pop_front() {
        if x == t {
            let mut out = vec![t.clone()];
            let mut c = t;
            while let Some(&p) = prev.get(c) {
                out.push(p.clone());
                c = p;
            }
            out.reverse();
            return Some(out);
        }
        for &y in adj.get(x).into_iter().flatten() {
            if seen.insert(y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    None
}

/// The double ray inside `first ∪ path ∪ second` through the tails beyond
/// their last meeting with the rest, as `[left, right]` arms with the
/// subdivision vertices dropped.
fn stitch(first: &[VertexId], path: &[VertexId], second: &[VertexId]) -> Result<[Vec<VertexId>; 2]> {
    let on_path: HashSet<&VertexId> = path.iter().collect();
    let s1: HashSet<&VertexId> = first.iter().collect();
    let s2: HashSet<&VertexId> = second.iter().collect();
    let i = first
        .iter()
        .rposition(|v| on_path.contains(v) || s2.contains(v))
        .ok_or_else(|| Error::NotADoubleRay("ray does not meet its path".into()))?;
    let j = second
        .iter()
        .rposition(|v| on_path.contains(v) || s1.contains(v))
        .ok_or_else(|| Error::NotADoubleRay("ray does not meet its path".into()))?;
    let middle = union_path(&[&first[..=i], path, &second[..=j]], &first[i], &second[j])
        .ok_or_else(|| Error::NotADoubleRay("path system member is disconnected".into()))?;
    let mut left: Vec<VertexId> = first[i..].iter().rev().filter(|v| !is_sub(v)).cloned().collect();
    let mut rest: Vec<VertexId> = middle[1..].to_vec();
    rest.extend(second[j + 1..].iter().cloned());
    let mut right: Vec<VertexId> = rest.into_iter().filter(|v| !is_sub(v)).collect();
    if left.is_empty() {
        left.push(right.remove(0));
    }
    left.reverse();
    if right.is_empty() {
        return Err(Error::NotADoubleRay("stitched path has one arm".into()));
    }
    Ok([left, right])
}

/// Everything fixed at the first horizon; later horizons only restitch.
struct Plan {
    first: Vec<RayStream>,
    paths: Vec<Vec<VertexId>>,
    second: Vec<RayStream>,
}

impl Plan {
    fn run(&self, g: &LazyGraph, h: usize) -> Result<PathRun> {
        let ball = g.ball(h)?;
        let dist = |v: &VertexId| ball.dist(v).unwrap_or(usize::MAX);
        let mut out = Vec::new();
        for ((r1, p), r2) in self.first.iter().zip(&self.paths).zip(&self.second) {
            let arms = stitch(&r1.at(h), p, &r2.at(h))?;
            for arm in arms {
                out.push(arm.into_iter().map(|v| (v.clone(), dist(&v))).collect());
            }
        }
        Ok(out)
    }
}

/// Side `C + v` of `g - S`: edges avoiding `S`, plus those from `v` into `C`.
fn side_graph(g: &LazyGraph, sep: &Arc<BTreeSet<VertexId>>, v: &VertexId, into: BTreeSet<VertexId>) -> LazyGraph {
    let (sep, v0) = (sep.clone(), v.clone());
    g.restrict_edges(format!("{}:side", g.name()), v.clone(), move |a, b| {
        if *a == v0 {
            into.contains(b)
        } else if *b == v0 {
            into.contains(a)
        } else {
            !sep.contains(a) && !sep.contains(b)
        }
    })
}

/// Edge-disjoint rays from `v`, asking for spares first.
fn host_rays(g: &LazyGraph, v: &VertexId, m: usize, horizon: usize) -> Result<Vec<RayStream>> {
    match edge_disjoint_rays_from(g, v, 2 * m, horizon) {
        Ok(r) => Ok(r),
        Err(e) if e.is_horizon() => edge_disjoint_rays_from(g, v, m, horizon),
        Err(e) => Err(e),
    }
}

/// The largest `n <= most`, `n >= least`, for which rays with distinct starts exist.
fn distinct_starts(hosts: &[RayStream], starts: &BTreeSet<VertexId>, least: usize, horizon: usize) -> Result<Vec<RayStream>> {
    let mut n = starts.len();
    loop {
        match rays_from_starts(hosts, starts, n, horizon) {
            Ok(r) => return Ok(r),
            Err(e) if e.is_horizon() && n > least => n -= 1,
            Err(e) => return Err(e),
        }
    }
}

/// `m` edge-disjoint double rays converging to both thin ends `ends`, from a
/// family generator whose members join them.
pub fn two_ended_double_rays(
    g: &LazyGraph,
    ends: [usize; 2],
    gen: &FamilyGenerator,
    m: usize,
    horizon: usize,
) -> Result<(Vec<DoubleRayStream>, Arc<Checkpoints>, TwoEndedTrace)> {
    let ball = g.ball(horizon)?;
    let fg = &ball.graph;
    let mut sep = BTreeSet::new();
    let ids: Vec<usize> = g.ends().iter().map(|e| e.end_id).collect();
    for (x, &a) in ids.iter().enumerate() {
        for &b in &ids[x + 1..] {
            sep.extend(end_separator(g, &ball, a, b)?);
        }
    }
    let comps = components(fg, &sep);
    let comp_of: HashMap<&VertexId, usize> =
        comps.iter().enumerate().flat_map(|(c, vs)| vs.iter().map(move |v| (v, c))).collect();
    let side = |end: usize| -> Result<usize> {
        let deep = deep_witnesses(&ball, g, end)?;
        Ok(comp_of[deep.iter().next().unwrap()])
    };
    let sides = [side(ends[0])?, side(ends[1])?];
    if sides[0] == sides[1] {
        return Err(Error::Metadata(format!("ends {} and {} are not separated", ends[0], ends[1])));
    }

    // common last vertices in the separator, by pigeonhole over the family
    let want = sep.len() * sep.len() * m;
    let mut counts: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
    let mut unconverged = 0;
    for d in gen.produce(want.max(m)) {
        let mut path = d.at(horizon).vertices();
        let side_of = |v: &VertexId| comp_of.get(v).copied();
        if side_of(path.first().unwrap()) == Some(sides[0]) {
            path.reverse();
        }
        let (Some(a), Some(b)) = (side_of(path.first().unwrap()), side_of(path.last().unwrap())) else {
            unconverged += 1;
            continue;
        };
        if (a, b) != (sides[1], sides[0]) {
            unconverged += 1;
            continue;
        }
        let last1 = path.iter().rev().find(|v| sep.contains(*v));
        let last2 = path.iter().find(|v| sep.contains(*v));
        match (last1, last2) {
            (Some(x), Some(y)) => *counts.entry((x.clone(), y.clone())).or_default() += 1,
            _ => unconverged += 1,
        }
    }
    let ((v1, v2), _) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, c)| (k.clone(), *c))
        .ok_or_else(|| Error::horizon("family members joining both ends", 0, Some(2 * horizon)))?;

    // edge-disjoint rays from v1 into C1 and from v2 into C2
    let sep = Arc::new(sep);
    let into = |v: &VertexId, c: usize| -> BTreeSet<VertexId> {
        fg.neighbors(v).filter(|w| comp_of.get(w) == Some(&c)).cloned().collect()
    };
    let g1 = side_graph(g, &sep, &v1, into(&v1, sides[0]));
    let g2 = side_graph(g, &sep, &v2, into(&v2, sides[1]));
    let all1 = host_rays(&g1, &v1, m, horizon)?;
    let all2 = host_rays(&g2, &v2, m, horizon)?;
    let k = g.end(ends[0]).and_then(|e| e.vertex_degree.finite()).unwrap_or(1);
    let meet1 = refine_mutual_intersection(&all1, k, horizon, 2);
    let meet2 = refine_mutual_intersection(&all2, k, horizon, 2);
    let hosts1: Vec<RayStream> = meet1.iter().map(|&i| subdivided(&all1[i])).collect();
    let hosts2: Vec<RayStream> = meet2.iter().map(|&i| subdivided(&all2[i])).collect();

    // subdivide the host edges and pack paths between the two subdivision sets
    let host_edges = |hosts: &[RayStream]| -> HashSet<EdgeId> {
        hosts
            .iter()
            .flat_map(|r| {
                let p = r.at(horizon);
                p.iter().filter(|v| is_sub(v)).cloned().collect::<Vec<_>>()
            })
            .filter_map(|s| {
                let (u, v) = s.as_str()[SUBDIVISION.len()..].split_once('|')?;
                EdgeId::new(VertexId::new(u), VertexId::new(v))
            })
            .filter(|e| {
                let (u, v) = e.endpoints();
                fg.has_edge(u, v)
            })
            .collect()
    };
    let (h1, h2) = (host_edges(&hosts1), host_edges(&hosts2));
    let mut edges = Vec::with_capacity(fg.edge_count() + h1.len() + h2.len());
    for e in fg.edges() {
        if h1.contains(&e) || h2.contains(&e) {
            let s = sub_id(&e);
            let (u, v) = e.endpoints();
            edges.push(EdgeId::new(u.clone(), s.clone()).unwrap());
            edges.push(EdgeId::new(s, v.clone()).unwrap());
        } else {
            edges.push(e);
        }
    }
    let sub = FiniteGraph::from_edges(edges);
    let idx = |set: &HashSet<EdgeId>| -> Vec<usize> {
        let mut v: Vec<usize> = set.iter().map(|e| sub.index_of(&sub_id(e)).unwrap()).collect();
        v.sort_unstable();
        v
    };
    let (x1, x2) = (idx(&h1), idx(&h2));
    let unit: HashSet<usize> = x1.iter().chain(&x2).copied().collect();
    let is_unit = |i: usize| unit.contains(&i);
    let x1_set: HashSet<usize> = x1.iter().copied().collect();
    let packing = PathPacking {
        graph: &sub,
        sources: x1.iter().map(|&i| (i, 1)).collect(),
        sinks: x2.clone(),
        unit_vertices: Some(&is_unit),
        edge_ok: None,
        limit: 4 * m as i64,
    };
    let system: Vec<Vec<VertexId>> = edge_disjoint_paths(&packing)
        .into_iter()
        .map(|p| {
            let from = p.iter().rposition(|i| x1_set.contains(i)).unwrap();
            p[from..].iter().map(|&i| sub.id(i).clone()).collect()
        })
        .collect();
    if system.len() < m {
        return Err(Error::horizon(format!("{m} paths between the ray unions"), system.len(), Some(2 * horizon)));
    }

    // rays with distinct starts on both sides, then the paths joining them
    let y1: BTreeSet<VertexId> = system.iter().map(|p| p[0].clone()).collect();
    let r1 = distinct_starts(&hosts1, &y1, m, horizon)?;
    let start = |r: &RayStream| r.at(horizon).first().cloned();
    let by_start1: BTreeMap<VertexId, RayStream> = r1.iter().filter_map(|r| Some((start(r)?, r.clone()))).collect();
    let y2: BTreeSet<VertexId> = system
        .iter()
        .filter(|p| by_start1.contains_key(&p[0]))
        .map(|p| p.last().unwrap().clone())
        .collect();
    let r2 = distinct_starts(&hosts2, &y2, m, horizon)?;
    let by_start2: BTreeMap<VertexId, RayStream> = r2.iter().filter_map(|r| Some((start(r)?, r.clone()))).collect();
    let chosen: Vec<&Vec<VertexId>> = system
        .iter()
        .filter(|p| by_start1.contains_key(&p[0]) && by_start2.contains_key(p.last().unwrap()))
        .take(m)
        .collect();
    if chosen.len() < m {
        return Err(Error::horizon(format!("{m} joined ray pairs"), chosen.len(), Some(2 * horizon)));
    }
    let plan = Plan {
        first: chosen.iter().map(|p| by_start1[&p[0]].clone()).collect(),
        paths: chosen.iter().map(|p| (*p).clone()).collect(),
        second: chosen.iter().map(|p| by_start2[p.last().unwrap()].clone()).collect(),
    };
    let first_run = plan.run(g, horizon)?;
    let centers: Vec<EdgeId> = first_run
        .chunks(2)
        .map(|c| EdgeId::new(c[0][0].0.clone(), c[1][0].0.clone()).unwrap())
        .collect();
    let trace = TwoEndedTrace {
        ends,
        separator: sep.iter().cloned().collect(),
        last_vertices: [v1, v2],
        pair_counts: counts.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
        unconverged,
        hosts: [all1.len(), all2.len()],
        meeting: [meet1, meet2],
        path_system: system.len(),
        starts: [r1.len(), r2.len()],
    };
    let g2 = g.clone();
    let cp = Checkpoints::start(horizon, move |h| {
        if h == horizon {
            return Ok(first_run.clone());
        }
        plan.run(&g2, h)
    })?;
    let streams = centers
        .into_iter()
        .enumerate()
        .map(|(i, c)| DoubleRayStream::new(c, cp.ray(2 * i), cp.ray(2 * i + 1)))
        .collect();
    Ok((streams, cp, trace))
}
