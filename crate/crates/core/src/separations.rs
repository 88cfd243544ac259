//! Separations of truncations and sequences of them that capture a thin end.

use std::collections::{BTreeSet, VecDeque};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{min_cut_indices, Ball, EdgeId, LazyGraph, VertexId};

/// Extra radius the deep side must show beyond a separator before it is trusted.
pub const GUARD_RADIUS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    X,
    B,
}

/// A separation of a truncation, given by its separator and a side per vertex.
///
/// Vertices outside the truncation count as side B. Edges with an endpoint
/// strictly on side A belong to A; all other edges, including those inside
/// the separator, belong to B.
#[derive(Debug, Clone)]
pub struct Separation {
    ball: Arc<Ball>,
    separator: Vec<VertexId>,
    sides: Arc<[Side]>,
}

impl Separation {
    /// Builds a separation from its separator and strict A side; everything else is B.
    pub fn from_sides(
        ball: Arc<Ball>,
        separator: impl IntoIterator<Item = VertexId>,
        a_side: &BTreeSet<VertexId>,
    ) -> Result<Self> {
        let fg = &ball.graph;
        let separator: BTreeSet<VertexId> = separator.into_iter().collect();
        let mut sides = vec![Side::B; fg.vertex_count()];
        for v in &separator {
            let i = fg
                .index_of(v)
                .ok_or_else(|| Error::Input(format!("separator vertex {v} outside the truncation")))?;
            sides[i] = Side::X;
        }
        for v in a_side {
            let i = fg
                .index_of(v)
                .ok_or_else(|| Error::Input(format!("side-A vertex {v} outside the truncation")))?;
            if sides[i] == Side::X {
                return Err(Error::Input(format!("{v} is both on side A and in the separator")));
            }
            sides[i] = Side::A;
        }
        for i in 0..fg.vertex_count() {
            if sides[i] == Side::A && fg.adj(i).iter().any(|&j| sides[j] == Side::B) {
                return Err(Error::Input(format!(
                    "separator does not separate: {} has a side-B neighbour",
                    fg.id(i)
                )));
            }
        }
        Ok(Separation {
            ball,
            separator: separator.into_iter().collect(),
            sides: sides.into(),
        })
    }

    pub fn separator(&self) -> &[VertexId] {
        &self.separator
    }

    pub fn order(&self) -> usize {
        self.separator.len()
    }

    pub fn horizon(&self) -> usize {
        self.ball.radius()
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn side_of(&self, v: &VertexId) -> Side {
        self.ball
            .graph
            .index_of(v)
            .map_or(Side::B, |i| self.sides[i])
    }

    pub(crate) fn side_idx(&self, i: usize) -> Side {
        self.sides[i]
    }

    /// Sides of the vertices of `ball`, by index.
    fn sides_on(&self, ball: &Arc<Ball>) -> Arc<[Side]> {
        if Arc::ptr_eq(&self.ball, ball) {
            return self.sides.clone();
        }
        ball.graph.vertices().iter().map(|v| self.side_of(v)).collect()
    }

    /// Vertex lies in the subgraph A (strict side A or separator).
    pub fn in_a(&self, v: &VertexId) -> bool {
        self.side_of(v) != Side::B
    }

    /// Vertex lies in the subgraph B (strict side B or separator).
    pub fn in_b(&self, v: &VertexId) -> bool {
        self.side_of(v) != Side::A
    }

    pub fn edge_side(&self, u: &VertexId, v: &VertexId) -> Side {
        if self.side_of(u) == Side::A || self.side_of(v) == Side::A {
            Side::A
        } else {
            Side::B
        }
    }

    pub fn edge_side_of(&self, e: &EdgeId) -> Side {
        let (u, v) = e.endpoints();
        self.edge_side(u, v)
    }

    pub fn export(&self) -> SeparationExport {
        SeparationExport {
            separator: self.separator.clone(),
            horizon: self.horizon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationExport {
    pub separator: Vec<VertexId>,
    pub horizon: usize,
}

/// Separations of one truncation, meant to capture a declared thin end.
#[derive(Debug, Clone)]
pub struct CapturingSequence {
    pub seps: Vec<Separation>,
    pub end_id: usize,
    pub k: usize,
    levels: OnceLock<Option<Arc<Vec<u32>>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapturingExport {
    pub end_id: usize,
    pub k: usize,
    pub separations: Vec<SeparationExport>,
}

impl CapturingSequence {
    pub fn new(seps: Vec<Separation>, end_id: usize, k: usize) -> Self {
        CapturingSequence {
            seps,
            end_id,
            k,
            levels: OnceLock::new(),
        }
    }

    /// Truncation radius shared by all separations, if any.
    pub fn horizon(&self) -> Option<usize> {
        self.seps.first().map(Separation::horizon)
    }

    fn level_table(&self) -> Option<&Arc<Vec<u32>>> {
        self.levels
            .get_or_init(|| {
                let ball = self.seps.first()?.ball.clone();
                if !self.seps.iter().all(|s| Arc::ptr_eq(&s.ball, &ball)) {
                    return None;
                }
                let n = ball.graph.vertex_count();
                let table = (0..n)
                    .map(|i| {
                        self.seps
                            .iter()
                            .position(|s| s.sides[i] != Side::B)
                            .map_or(u32::MAX, |p| p as u32)
                    })
                    .collect();
                Some(Arc::new(table))
            })
            .as_ref()
    }

    pub fn len(&self) -> usize {
        self.seps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seps.is_empty()
    }

    pub fn export(&self) -> CapturingExport {
        CapturingExport {
            end_id: self.end_id,
            k: self.k,
            separations: self.seps.iter().map(Separation::export).collect(),
        }
    }

    /// Least index `i` with `v` in A_i, if any.
    pub fn level_of(&self, v: &VertexId) -> Option<usize> {
        match self.level_table() {
            Some(t) => {
                let i = self.seps[0].ball.graph.index_of(v)?;
                (t[i] != u32::MAX).then_some(t[i] as usize)
            }
            None => self.seps.iter().position(|s| s.in_a(v)),
        }
    }
}

/// Restriction to the separations at the given strictly increasing positions.
pub fn subsequence(seq: &CapturingSequence, indices: &[usize]) -> Result<CapturingSequence> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("subsequence indices must be strictly increasing".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= seq.seps.len()) {
        return Err(Error::Input(format!(
            "index {bad} out of range for a sequence of length {}",
            seq.seps.len()
        )));
    }
    Ok(CapturingSequence::new(
        indices.iter().map(|&i| seq.seps[i].clone()).collect(),
        seq.end_id,
        seq.k,
    ))
}

/// Computes `count` separations capturing the declared thin end `end_id`.
pub fn capture_end(g: &LazyGraph, end_id: usize, count: usize, horizon: usize) -> Result<CapturingSequence> {
    let seq = capture_upto(g, end_id, count, horizon)?;
    if seq.len() < count {
        let achieved = seq.len();
        let suggested = if achieved == 0 {
            2 * horizon.max(4)
        } else {
            horizon * count / achieved + 4 * GUARD_RADIUS
        };
        return Err(Error::horizon(
            format!("{count} separations of end {end_id}"),
            achieved,
            Some(suggested),
        ));
    }
    Ok(seq)
}

/// As many separations (up to `limit`) as fit into the truncation of radius `horizon`.
pub fn capture_upto(g: &LazyGraph, end_id: usize, limit: usize, horizon: usize) -> Result<CapturingSequence> {
    let end = g
        .end(end_id)
        .ok_or_else(|| Error::Input(format!("{} declares no end {end_id}", g.name())))?;
    let Some(k) = end.vertex_degree.finite() else {
        return Err(Error::Unsupported(format!(
            "end {end_id} is thick; capturing sequences exist only for thin ends"
        )));
    };
    let ball = g.ball(horizon)?;
    let fg = &ball.graph;
    let n = fg.vertex_count();
    let sink = ball.boundary();
    let mut is_sink = vec![false; n];
    for &v in &sink {
        is_sink[v] = true;
    }
    let mut starts: Vec<usize> = end
        .witness_rays
        .iter()
        .filter_map(|r| r.at(horizon).first().and_then(|v| fg.index_of(v)))
        .filter(|&v| !is_sink[v])
        .collect();
    starts.sort_unstable();
    starts.dedup();
    let order = ball.bfs_order();
    let mut consumed = vec![false; n];
    let mut consumed_list: Vec<usize> = Vec::new();
    let mut reached_sink = false;
    // vertices strictly on the A side of the last separation never enter a later cut
    let mut active = vec![true; n];
    let reach = outward_reach(&ball);
    let mut seps = Vec::new();
    for i in 0..limit {
        if i < order.len() && !consumed[order[i]] {
            consumed[order[i]] = true;
            consumed_list.push(order[i]);
            reached_sink |= is_sink[order[i]];
        }
        if sink.is_empty() || reached_sink {
            break;
        }
        let mut source = consumed_list.clone();
        source.extend(starts.iter().copied());
        let base = source.iter().map(|&v| ball.dist_idx(v)).max().unwrap_or(0);
        let Some((cut, side)) = local_cut(&ball, &source, &consumed, &active, &reach, base, k) else {
            break;
        };
        if cut.is_empty() {
            return Err(Error::Metadata(format!(
                "end {end_id}: the truncation has no deep part beyond the consumed region"
            )));
        }
        let deepest = cut.iter().map(|&v| ball.dist_idx(v)).max().unwrap_or(0);
        if deepest + GUARD_RADIUS > horizon {
            break;
        }
        if cut.len() != k {
            return Err(Error::Metadata(format!(
                "end {end_id} is declared with vertex degree {k}, but a minimum separator near the root has order {}",
                cut.len()
            )));
        }
        for j in 0..n {
            if side[j] == Side::A {
                active[j] = false;
            }
        }
        let mut separator: Vec<VertexId> = cut.iter().map(|&v| fg.id(v).clone()).collect();
        separator.sort();
        let sep = Separation {
            ball: ball.clone(),
            separator,
            sides: side.into(),
        };
        // T_i: BFS tree of the separator inside B_i, grown until it connects the separator
        for v in connect_in_b(&sep) {
            if !consumed[v] {
                consumed[v] = true;
                consumed_list.push(v);
                reached_sink |= is_sink[v];
            }
        }
        seps.push(sep);
    }
    Ok(CapturingSequence::new(seps, end_id, k))
}

/// For every vertex, the largest `d` such that some path from it to the
/// boundary only visits vertices at root distance at least `d`.
fn outward_reach(ball: &Ball) -> Vec<usize> {
    let fg = &ball.graph;
    let n = fg.vertex_count();
    let top = ball.radius();
    let mut best = vec![0usize; n];
    let mut done = vec![false; n];
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for v in ball.boundary() {
        best[v] = top;
        buckets[top].push(v);
    }
    for val in (0..=top).rev() {
        let mut i = 0;
        while i < buckets[val].len() {
            let v = buckets[val][i];
            i += 1;
            if done[v] || best[v] != val {
                continue;
            }
            done[v] = true;
            for &w in fg.adj(v) {
                let nv = val.min(ball.dist_idx(w));
                if !done[w] && nv > best[w] {
                    best[w] = nv;
                    buckets[nv].push(w);
                }
            }
        }
    }
    best
}

/// Side labels for a cut: A for inactive vertices and for vertices of `inner`
/// not reachable from `sink` avoiding the cut, B otherwise.
fn cut_sides(ball: &Ball, cut: &[usize], sink: &[usize], active: &[bool], inner: &[bool]) -> Vec<Side> {
    let fg = &ball.graph;
    let n = fg.vertex_count();
    let mut side = vec![Side::B; n];
    for &v in cut {
        side[v] = Side::X;
    }
    let deep = fg.bfs_dist(sink, |j| inner[j] && side[j] != Side::X);
    for j in 0..n {
        if !active[j] || (inner[j] && side[j] != Side::X && deep[j].is_none()) {
            side[j] = Side::A;
        }
    }
    side
}

/// Minimum cut between `source` and the boundary, closest to the source,
/// computed inside a layer around the source region that widens until the
/// cut stays clear of its outer rim. Falls back to the whole truncation.
fn local_cut(
    ball: &Ball,
    source: &[usize],
    uncuttable: &[bool],
    active: &[bool],
    reach: &[usize],
    base: usize,
    k: usize,
) -> Option<(Vec<usize>, Vec<Side>)> {
    let fg = &ball.graph;
    let n = fg.vertex_count();
    let mut width = 8;
    while base + width + 1 < ball.radius() {
        let d = base + width;
        width *= 2;
        let inner: Vec<bool> = (0..n)
            .map(|v| active[v] && !(reach[v] > d && ball.dist_idx(v) > d + 1))
            .collect();
        let rim: Vec<usize> = (0..n)
            .filter(|&v| inner[v] && ball.dist_idx(v) == d + 1 && reach[v] > d)
            .collect();
        if rim.is_empty() {
            continue;
        }
        let Ok(cut) = min_cut_indices(fg, source, &rim, uncuttable, &inner) else {
            continue;
        };
        if cut.len() == k && cut.iter().all(|&v| ball.dist_idx(v) <= d) {
            let side = cut_sides(ball, &cut, &rim, active, &inner);
            return Some((cut, side));
        }
    }
    let sink = ball.boundary();
    let cut = min_cut_indices(fg, source, &sink, uncuttable, active).ok()?;
    let side = cut_sides(ball, &cut, &sink, active, active);
    Some((cut, side))
}

/// Vertices of a BFS tree inside B joining all separator vertices, rooted at the least one.
fn connect_in_b(sep: &Separation) -> Vec<usize> {
    let fg = &sep.ball.graph;
    let xs: Vec<usize> = sep.separator.iter().map(|v| fg.index_of(v).unwrap()).collect();
    let Some(&root) = xs.first() else {
        return Vec::new();
    };
    let mut pred = vec![usize::MAX; fg.vertex_count()];
    pred[root] = root;
    let mut queue = VecDeque::from([root]);
    let mut missing: BTreeSet<usize> = xs[1..].iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        if missing.is_empty() {
            break;
        }
        for &w in fg.adj(v) {
            if pred[w] == usize::MAX && sep.sides[w] != Side::A {
                pred[w] = v;
                missing.remove(&w);
                queue.push_back(w);
            }
        }
    }
    let mut out = BTreeSet::from([root]);
    for &x in &xs[1..] {
        let mut v = x;
        while pred[v] != usize::MAX && !out.contains(&v) {
            out.insert(v);
            v = pred[v];
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulletReport {
    pub bullet: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureReport {
    pub horizon: usize,
    pub separations: usize,
    pub bullets: Vec<BulletReport>,
    /// Largest radius whose ball lies inside the union of the A sides.
    pub exhaustion_radius: usize,
}

impl CaptureReport {
    pub fn passed(&self) -> bool {
        self.bullets.iter().all(|b| b.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.bullets
            .iter()
            .filter(|b| !b.pass)
            .map(|b| b.bullet.as_str())
            .collect()
    }
}

pub const BULLET_DISJOINT: &str = "A_i ∩ B_{i+1} = ∅";
pub const BULLET_CONNECTED: &str = "A_{i+1} ∩ B_i connected";
pub const BULLET_EXHAUSTION: &str = "A_i exhaust the graph";
pub const BULLET_ORDER: &str = "order equals the end's vertex degree";
pub const BULLET_RAY: &str = "B_i contains a ray of the end";

/// Checks the five capture conditions on the truncation of radius `horizon`.
///
/// Exhaustion is tested through its finite surrogate: the A sides strictly
/// increase and A_i contains the first i vertices in BFS order.
pub fn verify_capture(seq: &CapturingSequence, g: &LazyGraph, horizon: usize) -> Result<CaptureReport> {
    let ball = g.ball(horizon)?;
    let fg = &ball.graph;
    let n = fg.vertex_count();
    let seps = &seq.seps;
    // sides re-read on this truncation; vertices outside a separation's own ball are B
    let tables: Vec<Arc<[Side]>> = seps.iter().map(|s| s.sides_on(&ball)).collect();

    let mut disjoint = None;
    'outer: for (t, w) in tables.windows(2).enumerate() {
        for i in 0..n {
            if w[0][i] != Side::B && w[1][i] != Side::A {
                disjoint = Some(format!("{} lies in A_{} and B_{}", fg.id(i), t, t + 1));
                break 'outer;
            }
        }
    }

    let mut connected = None;
    for (t, w) in tables.windows(2).enumerate() {
        let inside: Vec<bool> = (0..n).map(|i| w[1][i] != Side::B && w[0][i] != Side::A).collect();
        let edge_in = |i: usize, j: usize| {
            (w[1][i] == Side::A || w[1][j] == Side::A) && w[0][i] != Side::A && w[0][j] != Side::A
        };
        let members: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
        let Some(&first) = members.first() else {
            connected = Some(format!("A_{} ∩ B_{} is empty", t + 1, t));
            break;
        };
        let mut seen = vec![false; n];
        seen[first] = true;
        let mut stack = vec![first];
        while let Some(v) = stack.pop() {
            for &u in fg.adj(v) {
                if inside[u] && !seen[u] && edge_in(v, u) {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        if let Some(&lost) = members.iter().find(|&&i| !seen[i]) {
            connected = Some(format!(
                "A_{} ∩ B_{} splits: {} is not reachable from {}",
                t + 1,
                t,
                fg.id(lost),
                fg.id(first)
            ));
            break;
        }
    }

    let mut exhaustion = None;
    for (t, w) in tables.windows(2).enumerate() {
        let grows = (0..n).any(|i| w[0][i] == Side::B && w[1][i] != Side::B);
        let shrinks = (0..n).find(|&i| w[0][i] != Side::B && w[1][i] == Side::B);
        if let Some(i) = shrinks {
            exhaustion = Some(format!("{} leaves A between A_{} and A_{}", fg.id(i), t, t + 1));
            break;
        }
        if !grows {
            exhaustion = Some(format!("A_{} = A_{}: no progress", t, t + 1));
            break;
        }
    }
    if exhaustion.is_none() {
        let order = ball.bfs_order();
        'ex: for (t, s) in tables.iter().enumerate() {
            for &i in order.iter().take(t + 1) {
                if s[i] == Side::B {
                    exhaustion = Some(format!("BFS vertex {} is not in A_{}", fg.id(i), t));
                    break 'ex;
                }
            }
        }
    }

    let declared = g.end(seq.end_id).and_then(|e| e.vertex_degree.finite());
    let mut order_fail = None;
    if declared != Some(seq.k) {
        order_fail = Some(format!(
            "sequence order {} but end {} declares {:?}",
            seq.k, seq.end_id, declared
        ));
    }
    if let Some((t, s)) = seps.iter().enumerate().find(|(_, s)| s.order() != seq.k) {
        order_fail = Some(format!("separation {t} has order {} instead of {}", s.order(), seq.k));
    }

    let mut ray_fail = None;
    let witnesses: Vec<Arc<Vec<VertexId>>> = g
        .end(seq.end_id)
        .map(|e| e.witness_rays.iter().map(|r| r.at(horizon)).collect())
        .unwrap_or_default();
    if witnesses.is_empty() && !seps.is_empty() {
        ray_fail = Some(format!("end {} has no witness ray", seq.end_id));
    }
    for (t, s) in seps.iter().enumerate() {
        for (w, prefix) in witnesses.iter().enumerate() {
            let tail_ok = prefix.last().is_some_and(|v| s.side_of(v) == Side::B)
                && prefix.iter().rev().take_while(|v| s.side_of(v) == Side::B).count() > GUARD_RADIUS;
            if !tail_ok {
                ray_fail = Some(format!("witness ray {w} has no tail in B_{t}"));
            }
        }
    }

    let mut union_a = vec![false; n];
    for s in &tables {
        for (i, flag) in union_a.iter_mut().enumerate() {
            *flag |= s[i] != Side::B;
        }
    }
    let exhaustion_radius = (0..n)
        .filter(|&i| !union_a[i])
        .map(|i| ball.dist_idx(i))
        .min()
        .map_or(horizon, |d| d.saturating_sub(1));

    let bullet = |name: &str, fail: Option<String>| BulletReport {
        bullet: name.to_string(),
        pass: fail.is_none(),
        witness: fail,
    };
    Ok(CaptureReport {
        horizon,
        separations: seps.len(),
        bullets: vec![
            bullet(BULLET_DISJOINT, disjoint),
            bullet(BULLET_CONNECTED, connected),
            bullet(BULLET_EXHAUSTION, exhaustion),
            bullet(BULLET_ORDER, order_fail),
            bullet(BULLET_RAY, ray_fail),
        ],
        exhaustion_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::instance;
    use serde_json::Value;

    fn ladder() -> LazyGraph {
        instance("thick_ladder", &Value::Null).unwrap()
    }

    #[test]
    fn ladder_separators_are_rungs() {
        let g = ladder();
        let seq = capture_end(&g, 0, 3, 60).unwrap();
        for (i, s) in seq.seps.iter().enumerate() {
            let names: Vec<&str> = s.separator().iter().map(|v| v.as_str()).collect();
            assert_eq!(names, [format!("a:{}", i + 1), format!("b:{}", i + 1)]);
        }
        assert!(verify_capture(&seq, &g, 60).unwrap().passed());
    }

    #[test]
    fn tree_has_no_thin_end_to_capture() {
        let g = instance("binary_tree", &Value::Null).unwrap();
        assert!(capture_end(&g, 0, 1, 4).is_err());
    }

    #[test]
    fn horizon_too_small_is_signalled() {
        let err = capture_end(&ladder(), 0, 50, 20).unwrap_err();
        match err {
            Error::NeedsLargerHorizon { achieved, suggested, .. } => {
                assert!(achieved < 50);
                assert!(suggested.unwrap() > 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repeated_separation_fails_exhaustion() {
        let g = ladder();
        let seq = capture_end(&g, 0, 2, 40).unwrap();
        let twice = CapturingSequence::new(vec![seq.seps[0].clone(), seq.seps[0].clone()], seq.end_id, seq.k);
        let report = verify_capture(&twice, &g, 40).unwrap();
        assert!(report.failed().contains(&BULLET_EXHAUSTION));
    }

    #[test]
    fn subsequence_checks_indices() {
        let g = ladder();
        let seq = capture_end(&g, 0, 4, 60).unwrap();
        assert!(subsequence(&seq, &[2, 1]).is_err());
        assert!(subsequence(&seq, &[9]).is_err());
        assert!(subsequence(&seq, &[]).unwrap().is_empty());
        let same = subsequence(&seq, &[0, 1, 2, 3]).unwrap();
        assert_eq!(same.export(), seq.export());
    }
}
