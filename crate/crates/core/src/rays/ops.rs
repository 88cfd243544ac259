//! Operations on ray streams: 2-rays from double rays, tails, lefty
//! normalisation, locally finite hulls, mutual-intersection refinement and
//! ray systems with prescribed starts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::stream::{DoubleRayStream, RayStream, TwoRayStream};
use crate::error::{Error, Result};
use crate::graph::{edge_disjoint_paths, path_edges, EdgeId, FiniteGraph, LazyGraph, PathPacking, VertexId};
use crate::separations::CapturingSequence;

/// Splits a double ray at its center edge into its two arms.
///
/// The arms of a double ray are vertex-disjoint, so the removed segment is the
/// center edge alone. Checked at `horizon`.
pub fn to_two_ray(d: &DoubleRayStream, horizon: usize) -> Result<TwoRayStream> {
    let p = d.at(horizon);
    let left: HashSet<&VertexId> = p.left.iter().collect();
    if let Some(v) = p.right.iter().find(|v| left.contains(v)) {
        return Err(Error::NotADoubleRay(format!(
            "both arms of the double ray at {} pass through {v}",
            d.center()
        )));
    }
    Ok(TwoRayStream::new(d.left().clone(), d.right().clone()))
}

fn lefty_start(prefix: &[VertexId], seq: &CapturingSequence, floor: usize) -> Option<usize> {
    // tail after the last vertex below `floor`, then at the last vertex of least level
    let levels: Vec<usize> = prefix.iter().map(|v| seq.level_of(v).unwrap_or(usize::MAX)).collect();
    let from = levels.iter().rposition(|&l| l < floor).map_or(0, |i| i + 1);
    let min = *levels[from..].iter().min()?;
    if min == usize::MAX {
        return Some(from);
    }
    Some(from + levels[from..].iter().rposition(|&l| l == min).unwrap())
}

/// Replaces both rays by tails so that each ray starts in every A_i it meets
/// and, for every i, both rays meet A_i or neither does.
pub fn make_lefty(t: &TwoRayStream, seq: &CapturingSequence) -> Result<TwoRayStream> {
    let Some(h) = seq.horizon() else {
        return Ok(t.clone());
    };
    let last = seq.seps.last().unwrap();
    let prefixes = [t.first.at(h), t.second.at(h)];
    let mut clipped: Vec<&[VertexId]> = Vec::new();
    for p in &prefixes {
        let c = last.ball().clip(p);
        if !c.last().is_some_and(|v| seq.level_of(v).is_none()) {
            return Err(Error::horizon(
                "a ray that clears every separation",
                0,
                Some(2 * h),
            ));
        }
        clipped.push(c);
    }
    let mut floor = 0;
    let starts = loop {
        let s: Vec<usize> = clipped
            .iter()
            .map(|c| lefty_start(c, seq, floor).unwrap())
            .collect();
        let lv: Vec<usize> = s
            .iter()
            .zip(&clipped)
            .map(|(&i, c)| seq.level_of(&c[i]).unwrap_or(usize::MAX))
            .collect();
        if lv[0] == lv[1] {
            break s;
        }
        floor = lv[0].max(lv[1]);
    };
    let tail = |r: &RayStream, c: &[VertexId], i: usize| {
        if i == 0 {
            r.clone()
        } else {
            r.tail_from(c[i].clone())
        }
    };
    Ok(TwoRayStream::new(
        tail(&t.first, clipped[0], starts[0]),
        tail(&t.second, clipped[1], starts[1]),
    ))
}

/// Tails of each 2-ray avoiding its forbidden edges within `horizon`.
pub fn tailor(d: &[TwoRayStream], forbidden: &[BTreeSet<EdgeId>], horizon: usize) -> Vec<TwoRayStream> {
    let cut = |r: &RayStream, bad: Option<&BTreeSet<EdgeId>>| {
        let Some(bad) = bad.filter(|b| !b.is_empty()) else {
            return r.clone();
        };
        let p = r.at(horizon);
        match path_edges(&p).enumerate().filter(|(_, e)| bad.contains(e)).last() {
            Some((i, _)) => r.tail_from(p[i + 1].clone()),
            None => r.clone(),
        }
    };
    d.iter()
        .enumerate()
        .map(|(i, t)| TwoRayStream::new(cut(&t.first, forbidden.get(i)), cut(&t.second, forbidden.get(i))))
        .collect()
}

/// Locally finite subgraph containing a tail of every input ray, at one horizon.
#[derive(Debug, Clone)]
pub struct Hull {
    pub graph: FiniteGraph,
    pub tails: Vec<RayStream>,
    /// Indices of the rays chosen to represent the ends of the union of tails.
    pub representatives: Vec<usize>,
    pub max_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullAudit {
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub representatives: Vec<usize>,
}

impl Hull {
    pub fn audit(&self) -> HullAudit {
        HullAudit {
            vertices: self.graph.vertex_count(),
            edges: self.graph.edge_count(),
            max_degree: self.max_degree,
            representatives: self.representatives.clone(),
        }
    }
}

pub fn locally_finite_hull(g: &LazyGraph, rays: &[RayStream], horizon: usize) -> Result<Hull> {
    let ball = g.ball(horizon)?;
    let fg = &ball.graph;
    let n = fg.vertex_count();
    let order = ball.bfs_order();
    let mut removed = vec![false; n];
    let mut tails = Vec::new();
    let mut tail_prefixes: Vec<Vec<usize>> = Vec::new();
    for (i, r) in rays.iter().enumerate() {
        if let Some(&v) = order.get(i) {
            removed[v] = true;
        }
        let p = r.at(horizon);
        let clip: Vec<usize> = ball.clip(&p).iter().map(|v| fg.index_of(v).unwrap()).collect();
        let Some(&deep) = clip.last() else {
            return Err(Error::horizon(format!("ray {i} inside the truncation"), i, Some(2 * horizon)));
        };
        if removed[deep] {
            return Err(Error::horizon(format!("a tail of ray {i} past the deleted vertices"), i, Some(2 * horizon)));
        }
        let comp = fg.bfs_dist(&[deep], |x| !removed[x]);
        let from = clip.iter().rposition(|&x| comp[x].is_none()).map_or(0, |k| k + 1);
        tails.push(if from == 0 { r.clone() } else { r.tail_from(fg.id(clip[from]).clone()) });
        tail_prefixes.push(clip[from..].to_vec());
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for p in &tail_prefixes {
        for w in p.windows(2) {
            edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    // ends of the union of tails, seen as deep components of its outer half
    let mut in_union = vec![false; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        in_union[a] = true;
        in_union[b] = true;
        adj[a].push(b);
        adj[b].push(a);
    }
    let outer = |x: usize| 2 * ball.dist_idx(x) > horizon;
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if !in_union[s] || !outer(s) || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if outer(y) && comp[y] == usize::MAX {
                    comp[y] = next;
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    let mut reps: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, p) in tail_prefixes.iter().enumerate() {
        if let Some(&deep) = p.last() {
            if comp[deep] != usize::MAX {
                reps.entry(comp[deep]).or_insert(i);
            }
        }
    }
    let mut representatives: Vec<usize> = reps.values().copied().collect();
    representatives.sort_unstable();
    if let Some((&first, rest)) = representatives.split_first() {
        let src: BTreeSet<usize> = tail_prefixes[first].iter().copied().collect();
        for &j in rest {
            let snk: Vec<usize> = tail_prefixes[j].iter().copied().filter(|x| !src.contains(x)).collect();
            if snk.len() < tail_prefixes[j].len() {
                continue;
            }
            let all = |_: usize| true;
            let packing = PathPacking {
                graph: fg,
                sources: src.iter().map(|&x| (x, 1)).collect(),
                sinks: snk,
                unit_vertices: Some(&all),
                edge_ok: None,
                limit: i64::MAX,
            };
            for path in edge_disjoint_paths(&packing) {
                for w in path.windows(2) {
                    edges.insert((w[0].min(w[1]), w[0].max(w[1])));
                }
            }
        }
    }
    let mut vertices: BTreeSet<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    for p in &tail_prefixes {
        vertices.extend(p.iter().copied());
    }
    let graph = FiniteGraph::new(
        vertices.iter().map(|&x| fg.id(x).clone()),
        edges.iter().map(|&(a, b)| EdgeId::new(fg.id(a).clone(), fg.id(b).clone()).unwrap()),
    )?
    .with_radius(horizon);
    let max_degree = graph.vertices().iter().map(|v| graph.degree(v)).max().unwrap_or(0);
    Ok(Hull {
        graph,
        tails,
        representatives,
        max_degree,
    })
}

fn vertex_sets(rays: &[RayStream], horizon: usize) -> Vec<HashSet<VertexId>> {
    rays.iter().map(|r| r.at(horizon).iter().cloned().collect()).collect()
}

/// Largest clique found greedily in the graph where two rays are adjacent
/// when their prefixes share at least `t` vertices. Returns ray indices.
pub fn refine_mutual_intersection(rays: &[RayStream], k: usize, horizon: usize, t: usize) -> Vec<usize> {
    let _ = k;
    let sets = vertex_sets(rays, horizon);
    let n = rays.len();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && sets[i].intersection(&sets[j]).count() >= t).collect())
        .collect();
    let mut best: Vec<usize> = Vec::new();
    for seed in 0..n {
        let mut clique = vec![seed];
        for j in 0..n {
            if j != seed && clique.iter().all(|&c| adj[c][j]) {
                clique.push(j);
            }
        }
        clique.sort_unstable();
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best
}

/// `k + 1` rays with pairwise vertex-disjoint prefixes, if any: evidence that
/// the end has vertex-degree above `k`.
pub fn disjoint_witness(rays: &[RayStream], k: usize, horizon: usize) -> Option<Vec<usize>> {
    let sets = vertex_sets(rays, horizon);
    let n = rays.len();
    let disjoint: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && sets[i].is_disjoint(&sets[j])).collect())
        .collect();
    fn grow(cur: &mut Vec<usize>, from: usize, goal: usize, ok: &[Vec<bool>]) -> bool {
        if cur.len() == goal {
            return true;
        }
        for j in from..ok.len() {
            if cur.iter().all(|&c| ok[c][j]) {
                cur.push(j);
                if grow(cur, j + 1, goal, ok) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    let mut cur = Vec::new();
    grow(&mut cur, 0, k + 1, &disjoint).then_some(cur)
}

/// Metadata check: no `k + 1` rays of the family may be pairwise disjoint.
pub fn check_vertex_degree(rays: &[RayStream], k: usize, horizon: usize) -> Result<()> {
    match disjoint_witness(rays, k, horizon) {
        Some(w) => Err(Error::Metadata(format!(
            "rays {w:?} are pairwise disjoint, so the end has vertex-degree above {k}"
        ))),
        None => Ok(()),
    }
}

/// `m` edge-disjoint rays with distinct starts in `starts`, built inside the
/// union of the pairwise edge-disjoint `hosts`.
pub fn rays_from_starts(hosts: &[RayStream], starts: &BTreeSet<VertexId>, m: usize, horizon: usize) -> Result<Vec<RayStream>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let prefixes: Vec<Arc<Vec<VertexId>>> = hosts.iter().map(|r| r.at(horizon)).collect();
    let on_host: Vec<Vec<&VertexId>> = prefixes
        .iter()
        .map(|p| p.iter().filter(|v| starts.contains(*v)).collect())
        .collect();

    // distinct hosts with distinct starts: bipartite matching host -> start
    let mut owner: HashMap<&VertexId, usize> = HashMap::new();
    fn augment<'a>(
        h: usize,
        on_host: &[Vec<&'a VertexId>],
        owner: &mut HashMap<&'a VertexId, usize>,
        seen: &mut HashSet<&'a VertexId>,
    ) -> bool {
        for &x in &on_host[h] {
            if seen.insert(x) {
                let free = match owner.get(x) {
                    None => true,
                    Some(&o) => augment(o, on_host, owner, seen),
                };
                if free {
                    owner.insert(x, h);
                    return true;
                }
            }
        }
        false
    }
    let mut matched = 0;
    for h in 0..hosts.len() {
        if matched == m {
            break;
        }
        if augment(h, &on_host, &mut owner, &mut HashSet::new()) {
            matched += 1;
        }
    }
    if matched >= m {
        let mut pairs: Vec<(usize, VertexId)> = owner.into_iter().map(|(x, h)| (h, x.clone())).collect();
        pairs.sort();
        return Ok(pairs
            .into_iter()
            .take(m)
            .map(|(h, x)| hosts[h].tail_from(x))
            .collect());
    }

    // one host carries many starts: walk along it and branch off onto unused hosts
    let heavy = (0..hosts.len()).max_by_key(|&h| (on_host[h].len(), std::cmp::Reverse(h))).unwrap();
    let base = &prefixes[heavy];
    let mut host_of: HashMap<&VertexId, Vec<usize>> = HashMap::new();
    for (h, p) in prefixes.iter().enumerate() {
        if h != heavy {
            for v in p.iter() {
                host_of.entry(v).or_default().push(h);
            }
        }
    }
    let mut used = vec![false; hosts.len()];
    used[heavy] = true;
    let mut out = Vec::new();
    let mut pos = 0;
    while out.len() < m {
        let Some(a) = (pos..base.len()).find(|&i| starts.contains(&base[i])) else {
            break;
        };
        let hit = (a..base.len()).find_map(|b| {
            host_of
                .get(&base[b])
                .and_then(|hs| hs.iter().copied().find(|&h| !used[h]))
                .map(|h| (b, h))
        });
        let Some((b, h)) = hit else {
            break;
        };
        used[h] = true;
        let segment: Vec<VertexId> = base[a..b].to_vec();
        let branch = hosts[h].tail_from(base[b].clone());
        out.push(RayStream::from_fn(move |hz| {
            let mut p = segment.clone();
            p.extend(branch.at(hz).iter().cloned());
            p
        }));
        pos = b.max(a + 1);
    }
    if out.len() < m {
        return Err(Error::horizon(
            format!("{m} edge-disjoint rays with distinct starts"),
            out.len().max(matched),
            Some(2 * horizon),
        ));
    }
    Ok(out)
}

struct Extender {
    g: LazyGraph,
    start: VertexId,
    m: usize,
    /// (horizon, paths, root distance of every path vertex)
    checkpoints: Mutex<Vec<(usize, Vec<Vec<VertexId>>, Vec<Vec<usize>>)>>,
}

impl Extender {
    fn first(&self, horizon: usize) -> Result<(Vec<Vec<VertexId>>, Vec<Vec<usize>>)> {
        let ball = self.g.ball(horizon)?;
        let fg = &ball.graph;
        let Some(s) = fg.index_of(&self.start).filter(|&s| ball.dist_idx(s) < horizon) else {
            return Err(Error::horizon(format!("rays from {}", self.start), 0, Some(2 * horizon.max(1))));
        };
        let packing = PathPacking {
            graph: fg,
            sources: vec![(s, self.m as i64)],
            sinks: ball.boundary(),
            unit_vertices: None,
            edge_ok: None,
            limit: self.m as i64,
        };
        let paths = edge_disjoint_paths(&packing);
        if paths.len() < self.m {
            return Err(Error::horizon(
                format!("{} edge-disjoint rays from {}", self.m, self.start),
                paths.len(),
                Some(2 * horizon),
            ));
        }
        let ids = paths.iter().map(|p| p.iter().map(|&i| fg.id(i).clone()).collect()).collect();
        let dists = paths.iter().map(|p| p.iter().map(|&i| ball.dist_idx(i)).collect()).collect();
        Ok((ids, dists))
    }

    fn extend(&self, from: usize, paths: &[Vec<VertexId>], dists: &[Vec<usize>]) -> Option<(Vec<Vec<VertexId>>, Vec<Vec<usize>>)> {
        let to = 2 * from;
        let ball = self.g.ball(to).ok()?;
        let fg = &ball.graph;
        let mut counts: BTreeMap<usize, i64> = BTreeMap::new();
        for p in paths {
            *counts.entry(fg.index_of(p.last()?)?).or_default() += 1;
        }
        let ok = |i: usize, j: usize| ball.dist_idx(i) >= from && ball.dist_idx(j) >= from;
        let packing = PathPacking {
            graph: fg,
            sources: counts.into_iter().collect(),
            sinks: ball.boundary(),
            unit_vertices: None,
            edge_ok: Some(&ok),
            limit: self.m as i64,
        };
        let mut found: BTreeMap<VertexId, Vec<Vec<usize>>> = BTreeMap::new();
        let ext = edge_disjoint_paths(&packing);
        if ext.len() < self.m {
            return None;
        }
        for p in ext {
            found.entry(fg.id(p[0]).clone()).or_default().push(p);
        }
        let mut out = Vec::new();
        let mut out_d = Vec::new();
        for (p, d) in paths.iter().zip(dists) {
            let e = found.get_mut(p.last().unwrap())?.remove(0);
            let mut np = p.clone();
            let mut nd = d.clone();
            np.extend(e[1..].iter().map(|&i| fg.id(i).clone()));
            nd.extend(e[1..].iter().map(|&i| ball.dist_idx(i)));
            out.push(np);
            out_d.push(nd);
        }
        Some((out, out_d))
    }

    fn prefix(&self, i: usize, h: usize) -> Vec<VertexId> {
        let mut cps = self.checkpoints.lock().unwrap();
        while cps.last().unwrap().0 < h {
            let (from, paths, dists) = cps.last().unwrap().clone();
            match self.extend(from, &paths, &dists) {
                Some((p, d)) => cps.push((2 * from, p, d)),
                // no room to extend: the stream stays at its last prefix
                None => cps.push((2 * from, paths, dists)),
            }
        }
        let (_, paths, dists) = cps.iter().find(|c| c.0 >= h).unwrap();
        let k = dists[i].iter().position(|&d| d > h).unwrap_or(dists[i].len());
        paths[i][..k].to_vec()
    }
}

/// `m` pairwise edge-disjoint rays starting at `v`, from a unit-capacity flow
/// to the boundary of the truncation; larger horizons extend the paths by
/// flows through the region beyond the previous truncation.
pub fn edge_disjoint_rays_from(g: &LazyGraph, v: &VertexId, m: usize, horizon: usize) -> Result<Vec<RayStream>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let ext = Extender {
        g: g.clone(),
        start: v.clone(),
        m,
        checkpoints: Mutex::new(Vec::new()),
    };
    let (paths, dists) = ext.first(horizon.max(1))?;
    ext.checkpoints.lock().unwrap().push((horizon.max(1), paths, dists));
    let ext = Arc::new(ext);
    Ok((0..m)
        .map(|i| {
            let e = ext.clone();
            RayStream::from_fn(move |h| e.prefix(i, h))
        })
        .collect())
}
