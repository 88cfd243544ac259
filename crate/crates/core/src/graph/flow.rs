//! Unit-capacity flow machinery: Menger vertex cuts and edge-disjoint path
//! packings on [`FiniteGraph`]s.
//!
//! Augmenting paths are found by BFS that scans arcs in insertion order, and
//! arcs are inserted in vertex-index order, so the lexicographically least
//! next vertex wins every tie. Results are deterministic.

use std::collections::{BTreeSet, VecDeque};

use super::finite::FiniteGraph;
use super::vertex::VertexId;
use crate::error::{Error, Result};

pub(crate) const INF: i64 = i64::MAX / 4;

#[derive(Debug, Default)]
pub(crate) struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    orig: Vec<i64>,
}

impl FlowNet {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); nodes],
            ..Default::default()
        }
    }

    pub(crate) fn add_arc(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let e = self.to.len();
        self.head[u].push(e);
        self.to.push(v);
        self.cap.push(cap);
        self.orig.push(cap);
        self.head[v].push(e + 1);
        self.to.push(u);
        self.cap.push(0);
        self.orig.push(0);
        e
    }

    pub(crate) fn flow_on(&self, e: usize) -> i64 {
        self.orig[e] - self.cap[e]
    }

    /// Augments along BFS-shortest paths until none remains or `limit` is reached.
    pub(crate) fn max_flow(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        let n = self.head.len();
        let mut total = 0;
        let mut pred = vec![usize::MAX; n];
        while total < limit {
            pred.iter_mut().for_each(|p| *p = usize::MAX);
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        pred[v] = e;
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            let mut bottleneck = limit - total;
            let mut v = t;
            while v != s {
                let e = pred[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = pred[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
        total
    }

    pub(crate) fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// A minimum vertex cut with its two sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCut {
    pub cut: BTreeSet<VertexId>,
    pub side_a: BTreeSet<VertexId>,
    pub side_b: BTreeSet<VertexId>,
}

impl VertexCut {
    pub fn order(&self) -> usize {
        self.cut.len()
    }
}

/// Minimum vertex cut separating `source` from `sink`; terminals may belong to the cut.
///
/// Cut size is minimised first. Among minimum cuts, ones using fewer terminal
/// vertices are preferred, and then the cut closest to the source is returned
/// (read off the residual graph reachable from the source). When no
/// source-sink path exists the cut is empty and `side_b` is empty.
pub fn min_vertex_cut(
    fg: &FiniteGraph,
    source: &BTreeSet<VertexId>,
    sink: &BTreeSet<VertexId>,
) -> Result<VertexCut> {
    min_vertex_cut_avoiding(fg, source, sink, &BTreeSet::new())
}

/// As [`min_vertex_cut`], but vertices in `uncuttable` may not be cut.
///
/// Fails with an input error if uncuttable vertices alone join the terminals.
pub fn min_vertex_cut_avoiding(
    fg: &FiniteGraph,
    source: &BTreeSet<VertexId>,
    sink: &BTreeSet<VertexId>,
    uncuttable: &BTreeSet<VertexId>,
) -> Result<VertexCut> {
    if source.is_empty() || sink.is_empty() {
        return Err(Error::Input("min_vertex_cut needs nonempty terminal sets".into()));
    }
    if let Some(v) = source.intersection(sink).next() {
        return Err(Error::Input(format!("vertex {v} is both source and sink")));
    }
    for v in source.iter().chain(sink.iter()) {
        if !fg.contains(v) {
            return Err(Error::Input(format!("terminal {v} not in graph")));
        }
    }
    let n = fg.vertex_count();
    // weight (n+1) per cut vertex plus 1 per cut terminal: size first, terminals second
    let unit = n as i64 + 1;
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNet::new(2 * n + 2);
    for i in 0..n {
        let id = fg.id(i);
        let cap = if uncuttable.contains(id) {
            INF
        } else if source.contains(id) || sink.contains(id) {
            unit + 1
        } else {
            unit
        };
        net.add_arc(2 * i, 2 * i + 1, cap);
    }
    for i in 0..n {
        for &j in fg.adj(i) {
            net.add_arc(2 * i + 1, 2 * j, INF);
        }
    }
    for v in source {
        net.add_arc(s, 2 * fg.index_of(v).unwrap(), INF);
    }
    for v in sink {
        net.add_arc(2 * fg.index_of(v).unwrap() + 1, t, INF);
    }
    let value = net.max_flow(s, t, INF);
    if value >= INF / 2 {
        return Err(Error::Input(
            "terminals are joined through uncuttable vertices".into(),
        ));
    }
    let mut cut = BTreeSet::new();
    let mut side_a = BTreeSet::new();
    let mut side_b = BTreeSet::new();
    if value == 0 {
        side_a.extend(fg.vertices().iter().cloned());
        return Ok(VertexCut { cut, side_a, side_b });
    }
    let reach = net.residual_reachable(s);
    for i in 0..n {
        let v = fg.id(i).clone();
        match (reach[2 * i], reach[2 * i + 1]) {
            (true, true) => side_a.insert(v),
            (true, false) => cut.insert(v),
            _ => side_b.insert(v),
        };
    }
    debug_assert_eq!(cut.len() as i64, value / unit);
    Ok(VertexCut { cut, side_a, side_b })
}

/// Index form of [`min_vertex_cut_avoiding`] on the subgraph induced by the
/// `active` vertices. Returns the cut, closest to the source, in index order.
pub(crate) fn min_cut_indices(
    fg: &FiniteGraph,
    source: &[usize],
    sink: &[usize],
    uncuttable: &[bool],
    active: &[bool],
) -> Result<Vec<usize>> {
    let n = fg.vertex_count();
    let mut local = vec![usize::MAX; n];
    let mut global = Vec::new();
    for i in 0..n {
        if active[i] {
            local[i] = global.len();
            global.push(i);
        }
    }
    let m = global.len();
    let mut terminal = vec![false; n];
    for &v in source.iter().chain(sink) {
        terminal[v] = true;
    }
    let unit = m as i64 + 1;
    let (s, t) = (2 * m, 2 * m + 1);
    let mut net = FlowNet::new(2 * m + 2);
    for (li, &i) in global.iter().enumerate() {
        let cap = if uncuttable[i] {
            INF
        } else if terminal[i] {
            unit + 1
        } else {
            unit
        };
        net.add_arc(2 * li, 2 * li + 1, cap);
    }
    for (li, &i) in global.iter().enumerate() {
        for &j in fg.adj(i) {
            if active[j] {
                net.add_arc(2 * li + 1, 2 * local[j], INF);
            }
        }
    }
    for &v in source.iter().filter(|&&v| active[v]) {
        net.add_arc(s, 2 * local[v], INF);
    }
    for &v in sink.iter().filter(|&&v| active[v]) {
        net.add_arc(2 * local[v] + 1, t, INF);
    }
    let value = net.max_flow(s, t, INF);
    if value >= INF / 2 {
        return Err(Error::Input("terminals are joined through uncuttable vertices".into()));
    }
    if value == 0 {
        return Ok(Vec::new());
    }
    let reach = net.residual_reachable(s);
    Ok((0..m)
        .filter(|&li| reach[2 * li] && !reach[2 * li + 1])
        .map(|li| global[li])
        .collect())
}

/// Options for [`edge_disjoint_paths`].
pub struct PathPacking<'a> {
    pub graph: &'a FiniteGraph,
    /// Start vertices with the number of paths each may emit.
    pub sources: Vec<(usize, i64)>,
    pub sinks: Vec<usize>,
    /// Vertices that at most one path may touch.
    pub unit_vertices: Option<&'a dyn Fn(usize) -> bool>,
    /// Edges (by endpoint index) that may be used.
    pub edge_ok: Option<&'a dyn Fn(usize, usize) -> bool>,
    pub limit: i64,
}

/// Packs pairwise edge-disjoint paths from sources to sinks, maximum cardinality
/// up to `limit`. Every path ends at the first sink it reaches and is simple.
pub fn edge_disjoint_paths(p: &PathPacking<'_>) -> Vec<Vec<usize>> {
    let fg = p.graph;
    let n = fg.vertex_count();
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNet::new(2 * n + 2);
    for i in 0..n {
        let unit = p.unit_vertices.is_some_and(|f| f(i));
        net.add_arc(2 * i, 2 * i + 1, if unit { 1 } else { INF });
    }
    let mut arcs = Vec::new();
    for i in 0..n {
        for &j in fg.adj(i) {
            if p.edge_ok.is_none_or(|f| f(i, j)) {
                let e = net.add_arc(2 * i + 1, 2 * j, 1);
                arcs.push((i, j, e));
            }
        }
    }
    let mut src_arcs = Vec::new();
    for &(v, cap) in &p.sources {
        src_arcs.push((v, net.add_arc(s, 2 * v, cap)));
    }
    let mut is_sink = vec![false; n];
    for &v in &p.sinks {
        is_sink[v] = true;
        net.add_arc(2 * v + 1, t, INF);
    }
    net.max_flow(s, t, p.limit);

    // net flow per directed vertex pair, opposite units cancel
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut fwd = std::collections::HashMap::new();
    for &(i, j, e) in &arcs {
        if net.flow_on(e) > 0 {
            *fwd.entry((i, j)).or_insert(0i64) += 1;
        }
    }
    for (&(i, j), &f) in &fwd {
        let back = fwd.get(&(j, i)).copied().unwrap_or(0);
        if f > back {
            out[i].push(j);
        }
    }
    for list in &mut out {
        list.sort_unstable();
    }
    let mut starts: Vec<usize> = Vec::new();
    for &(v, e) in &src_arcs {
        for _ in 0..net.flow_on(e) {
            starts.push(v);
        }
    }
    starts.sort_unstable();

    let mut paths = Vec::new();
    for start in starts {
        let mut path = vec![start];
        let mut pos = std::collections::HashMap::from([(start, 0usize)]);
        let mut v = start;
        loop {
            if is_sink[v] {
                break;
            }
            if out[v].is_empty() {
                // flow was cut short at an earlier sink; drop this unit
                path.clear();
                break;
            }
            let w = out[v].remove(0);
            if let Some(&k) = pos.get(&w) {
                for x in path.drain(k + 1..) {
                    pos.remove(&x);
                }
            } else {
                pos.insert(w, path.len());
                path.push(w);
            }
            v = w;
        }
        if !path.is_empty() {
            paths.push(path);
        }
    }
    paths
}

/// Maximum family of pairwise edge-disjoint `s`–`t` paths.
pub fn max_edge_disjoint_paths(fg: &FiniteGraph, s: &VertexId, t: &VertexId) -> Result<Vec<Vec<VertexId>>> {
    let (Some(si), Some(ti)) = (fg.index_of(s), fg.index_of(t)) else {
        return Err(Error::Input(format!("{s} or {t} is not a vertex of the graph")));
    };
    if si == ti {
        return Err(Error::Input("source and sink coincide".into()));
    }
    let paths = edge_disjoint_paths(&PathPacking {
        graph: fg,
        sources: vec![(si, INF)],
        sinks: vec![ti],
        unit_vertices: None,
        edge_ok: None,
        limit: INF,
    });
    Ok(paths
        .into_iter()
        .map(|p| p.into_iter().map(|i| fg.id(i).clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;

    fn v(s: &str) -> VertexId {
        VertexId::new(s)
    }

    fn k4() -> FiniteGraph {
        let names = ["s", "t", "x", "y"];
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push(EdgeId::new(v(names[i]), v(names[j])).unwrap());
            }
        }
        FiniteGraph::new(names.iter().map(|n| v(n)), edges).unwrap()
    }

    #[test]
    fn path_cut_is_middle_vertex() {
        let p = FiniteGraph::path(["p1", "p2", "p3"]);
        let cut = min_vertex_cut(&p, &BTreeSet::from([v("p1")]), &BTreeSet::from([v("p3")])).unwrap();
        assert_eq!(cut.cut, BTreeSet::from([v("p2")]));
        assert_eq!(cut.order(), 1);
        let strict = min_vertex_cut_avoiding(
            &p,
            &BTreeSet::from([v("p1")]),
            &BTreeSet::from([v("p3")]),
            &BTreeSet::from([v("p1"), v("p3")]),
        )
        .unwrap();
        assert_eq!(strict.cut, BTreeSet::from([v("p2")]));
        assert!(strict.side_a.contains(&v("p1")));
        assert!(strict.side_b.contains(&v("p3")));
    }

    #[test]
    fn k4_cuts() {
        let g = k4();
        // adjacent terminals: no cut avoids them
        let strict = min_vertex_cut_avoiding(
            &g,
            &BTreeSet::from([v("s")]),
            &BTreeSet::from([v("t")]),
            &BTreeSet::from([v("s"), v("t")]),
        );
        assert!(strict.is_err());
        let cut = min_vertex_cut(&g, &BTreeSet::from([v("s")]), &BTreeSet::from([v("t")])).unwrap();
        assert_eq!(cut.cut, BTreeSet::from([v("s")]));
        // K4 minus the s-t edge: one path through s; avoiding terminals, the two others
        let g2 = g.filter_edges(|a, b| !((a == &v("s") && b == &v("t")) || (a == &v("t") && b == &v("s"))));
        let single = BTreeSet::from([v("s")]);
        let cut = min_vertex_cut(&g2, &single, &BTreeSet::from([v("t")])).unwrap();
        assert_eq!(cut.cut, single);
        let cut = min_vertex_cut_avoiding(
            &g2,
            &single,
            &BTreeSet::from([v("t")]),
            &BTreeSet::from([v("s"), v("t")]),
        )
        .unwrap();
        assert_eq!(cut.cut, BTreeSet::from([v("x"), v("y")]));
    }

    #[test]
    fn disconnected_terminals_signal_empty_cut() {
        let g = FiniteGraph::new([v("a"), v("b")], []).unwrap();
        let cut = min_vertex_cut(&g, &BTreeSet::from([v("a")]), &BTreeSet::from([v("b")])).unwrap();
        assert!(cut.cut.is_empty());
        assert!(cut.side_b.is_empty());
    }

    #[test]
    fn k4_edge_connectivity_three() {
        let paths = max_edge_disjoint_paths(&k4(), &v("s"), &v("t")).unwrap();
        assert_eq!(paths.len(), 3);
        let single = FiniteGraph::path(["s", "t"]);
        assert_eq!(max_edge_disjoint_paths(&single, &v("s"), &v("t")).unwrap().len(), 1);
        assert!(max_edge_disjoint_paths(&single, &v("s"), &v("q")).is_err());
    }
}
