//! Finite connectors of a vertex set meeting few members of an edge-disjoint family.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, FiniteGraph, VertexId};

#[derive(Debug, Clone)]
pub struct ConnectorResult {
    pub tree: FiniteGraph,
    /// Indices of family members sharing an edge with `tree`.
    pub touched: BTreeSet<usize>,
    /// Number of merge rounds performed.
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectorExport {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
    pub touched: Vec<usize>,
}

impl ConnectorResult {
    pub fn export(&self) -> ConnectorExport {
        let ex = self.tree.to_export();
        ConnectorExport {
            vertices: ex.vertices,
            edges: ex.edges,
            touched: self.touched.iter().copied().collect(),
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Connector of `s` in `fg` such that at most `2|s| - 2` members of `family`
/// share an edge with it. Members are given by their edge sets and must be
/// pairwise edge-disjoint with every component meeting `s`.
pub fn finite_connector(fg: &FiniteGraph, s: &BTreeSet<VertexId>, family: &[Vec<EdgeId>]) -> Result<ConnectorResult> {
    if s.is_empty() {
        return Err(Error::Input("connector of an empty set".into()));
    }
    if let Some(v) = s.iter().find(|v| !fg.contains(v)) {
        return Err(Error::Input(format!("{v} is not a vertex of the graph")));
    }
    if !fg.is_connected() {
        return Err(Error::Input("graph is disconnected".into()));
    }
    let n = fg.vertex_count();
    let idx = |v: &VertexId| fg.index_of(v).unwrap();

    // owner of each family edge, and the family split into connected pieces
    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (m, member) in family.iter().enumerate() {
        for e in member {
            let (u, v) = e.endpoints();
            let (Some(a), Some(b)) = (fg.index_of(u), fg.index_of(v)) else {
                return Err(Error::Input(format!("member {m} edge {e} is not in the graph")));
            };
            if !fg.has_edge(u, v) {
                return Err(Error::Input(format!("member {m} edge {e} is not in the graph")));
            }
            if let Some(prev) = owner.insert((a.min(b), a.max(b)), m) {
                if prev != m {
                    return Err(Error::Input(format!("members {prev} and {m} share the edge {e}")));
                }
            }
        }
    }
    let s_idx: BTreeSet<usize> = s.iter().map(idx).collect();
    let mut pieces: Vec<(usize, BTreeSet<usize>, Vec<(usize, usize)>)> = Vec::new();
    for (m, member) in family.iter().enumerate() {
        let mut verts: BTreeSet<usize> = BTreeSet::new();
        for e in member {
            let (u, v) = e.endpoints();
            verts.insert(idx(u));
            verts.insert(idx(v));
        }
        let local: Vec<usize> = verts.iter().copied().collect();
        let pos = |x: usize| local.binary_search(&x).unwrap();
        let mut uf = UnionFind((0..local.len()).collect());
        let edges: Vec<(usize, usize)> = member.iter().map(|e| (idx(e.endpoints().0), idx(e.endpoints().1))).collect();
        for &(a, b) in &edges {
            uf.union(pos(a), pos(b));
        }
        let mut groups: BTreeMap<usize, (BTreeSet<usize>, Vec<(usize, usize)>)> = BTreeMap::new();
        for &(a, b) in &edges {
            let g = groups.entry(uf.find(pos(a))).or_default();
            g.0.insert(a);
            g.0.insert(b);
            g.1.push((a, b));
        }
        for (_, (vs, es)) in groups {
            pieces.push((m, vs, es));
        }
    }

    let mut t_vertices: BTreeSet<usize> = s_idx.clone();
    let mut t_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut touched = BTreeSet::new();
    let mut rounds = 0;
    loop {
        let mut uf = UnionFind((0..n).collect());
        for &(a, b) in &t_edges {
            uf.union(a, b);
        }
        let comps: BTreeSet<usize> = t_vertices.iter().map(|&v| uf.find(v)).collect();
        if comps.len() <= 1 {
            break;
        }
        rounds += 1;
        let comp_list: Vec<usize> = comps.into_iter().collect();
        let comp_of = |uf: &mut UnionFind, v: usize| comp_list.binary_search(&uf.find(v)).unwrap();
        // expanded hulls: labels[v] = hull(s) containing v; via[c][v] = piece used
        let mut labels: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let mut via: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); comp_list.len()];
        for &v in &t_vertices {
            labels[v].insert(comp_of(&mut uf, v));
        }
        for (p, (_, vs, _)) in pieces.iter().enumerate() {
            let meets: BTreeSet<usize> = vs
                .iter()
                .filter(|v| t_vertices.contains(v))
                .map(|&v| comp_of(&mut uf, v))
                .collect();
            for &c in &meets {
                for &v in vs {
                    labels[v].insert(c);
                    via[c].entry(v).or_insert(p);
                }
            }
        }
        // shortest family-edge-free path between two different hulls
        let free = |a: usize, b: usize| !owner.contains_key(&(a.min(b), a.max(b)));
        let mut best: Option<(usize, usize, usize, Vec<usize>)> = None;
        if let Some(v) = (0..n).find(|&v| labels[v].len() >= 2) {
            let mut it = labels[v].iter();
            let (c1, c2) = (*it.next().unwrap(), *it.next().unwrap());
            best = Some((c1, c2, 0, vec![v]));
        }
        if best.is_none() {
            let mut dist = vec![usize::MAX; n];
            let mut label = vec![usize::MAX; n];
            let mut pred = vec![usize::MAX; n];
            let mut queue = VecDeque::new();
            for v in 0..n {
                if let Some(&c) = labels[v].iter().next() {
                    dist[v] = 0;
                    label[v] = c;
                    queue.push_back(v);
                }
            }
            while let Some(v) = queue.pop_front() {
                for &w in fg.adj(v) {
                    if free(v, w) && dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        label[w] = label[v];
                        pred[w] = v;
                        queue.push_back(w);
                    }
                }
            }
            let trace = |mut v: usize| {
                let mut out = vec![v];
                while pred[v] != usize::MAX {
                    v = pred[v];
                    out.push(v);
                }
                out
            };
            let mut key: Option<(usize, VertexId, VertexId)> = None;
            for v in 0..n {
                for &w in fg.adj(v) {
                    if dist[v] == usize::MAX || dist[w] == usize::MAX || label[v] >= label[w] || !free(v, w) {
                        continue;
                    }
                    let len = dist[v] + dist[w] + 1;
                    let cand = (len, fg.id(v).clone(), fg.id(w).clone());
                    if key.as_ref().is_none_or(|k| cand < *k) {
                        key = Some(cand);
                        let mut path = trace(v);
                        path.reverse();
                        path.extend(trace(w));
                        let (c1, c2) = (label[v], label[w]);
                        best = Some((c1, c2, len, path));
                    }
                }
            }
        }
        // pieces away from `s` may block every free path; then cross them
        let best = match best {
            Some(b) => Some(b),
            None => shortest_between_hulls(fg, &labels),
        };
        let Some((c1, c2, _, path)) = best else {
            return Err(Error::Input("no path joins the remaining components".into()));
        };
        // path runs from hull c1 to hull c2; extend inside one piece at each end
        let add = |a: usize, b: usize, t_edges: &mut BTreeSet<(usize, usize)>| {
            t_edges.insert((a.min(b), a.max(b)));
        };
        for w in path.windows(2) {
            add(w[0], w[1], &mut t_edges);
        }
        for (c, end) in [(c1, path[0]), (c2, *path.last().unwrap())] {
            let in_c = |uf: &mut UnionFind, v: usize| t_vertices.contains(&v) && comp_of(uf, v) == c;
            if in_c(&mut uf, end) {
                continue;
            }
            let p = via[c][&end];
            let (m, _, es) = &pieces[p];
            touched.insert(*m);
            let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &(a, b) in es {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
            let mut pred: BTreeMap<usize, usize> = BTreeMap::from([(end, end)]);
            let mut queue = VecDeque::from([end]);
            let mut hit = None;
            while let Some(v) = queue.pop_front() {
                if in_c(&mut uf, v) {
                    hit = Some(v);
                    break;
                }
                for &w in adj.get(&v).into_iter().flatten() {
                    if let std::collections::btree_map::Entry::Vacant(e) = pred.entry(w) {
                        e.insert(v);
                        queue.push_back(w);
                    }
                }
            }
            let mut v = hit.expect("piece meets its component");
            while v != end {
                let u = pred[&v];
                add(u, v, &mut t_edges);
                v = u;
            }
        }
        for &(a, b) in &t_edges {
            t_vertices.insert(a);
            t_vertices.insert(b);
        }
        for &(a, b) in &t_edges {
            if let Some(&m) = owner.get(&(a, b)) {
                touched.insert(m);
            }
        }
    }
    let tree = FiniteGraph::new(
        t_vertices.iter().map(|&v| fg.id(v).clone()),
        t_edges
            .iter()
            .map(|&(a, b)| EdgeId::new(fg.id(a).clone(), fg.id(b).clone()).unwrap()),
    )?;
    Ok(ConnectorResult { tree, touched, rounds })
}

fn shortest_between_hulls(fg: &FiniteGraph, labels: &[BTreeSet<usize>]) -> Option<(usize, usize, usize, Vec<usize>)> {
    let n = fg.vertex_count();
    let mut label = vec![usize::MAX; n];
    let mut pred = vec![usize::MAX; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if let Some(&c) = labels[v].iter().next() {
            label[v] = c;
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in fg.adj(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                label[w] = label[v];
                pred[w] = v;
                queue.push_back(w);
            }
        }
    }
    let trace = |mut v: usize| {
        let mut out = vec![v];
        while pred[v] != usize::MAX {
            v = pred[v];
            out.push(v);
        }
        out
    };
    let mut best: Option<(usize, usize, usize, Vec<usize>)> = None;
    for v in 0..n {
        for &w in fg.adj(v) {
            if label[v] == usize::MAX || label[w] == usize::MAX || label[v] >= label[w] {
                continue;
            }
            let len = dist[v] + dist[w] + 1;
            if best.as_ref().is_none_or(|b| len < b.2) {
                let mut path = trace(v);
                path.reverse();
                path.extend(trace(w));
                best = Some((label[v], label[w], len, path));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> BTreeSet<VertexId> {
        names.iter().map(|&n| VertexId::new(n)).collect()
    }

    fn edge(a: &str, b: &str) -> EdgeId {
        EdgeId::new(VertexId::new(a), VertexId::new(b)).unwrap()
    }

    #[test]
    fn triangle_without_family() {
        let fg = FiniteGraph::from_edges([edge("x", "y"), edge("y", "z"), edge("x", "z")]);
        let res = finite_connector(&fg, &ids(&["x", "y"]), &[]).unwrap();
        assert!(res.tree.is_connected());
        assert!(res.tree.contains(&VertexId::new("x")) && res.tree.contains(&VertexId::new("y")));
        assert!(res.touched.is_empty());
    }

    #[test]
    fn path_through_a_member() {
        let fg = FiniteGraph::path(["p1", "p2", "p3", "p4"]);
        let fam = vec![vec![edge("p2", "p3")]];
        let res = finite_connector(&fg, &ids(&["p1", "p4"]), &fam).unwrap();
        assert_eq!(res.tree.edge_count(), 3);
        assert_eq!(res.touched, BTreeSet::from([0]));
        let fam = vec![vec![edge("p1", "p2"), edge("p2", "p3")]];
        let res = finite_connector(&fg, &ids(&["p1", "p4"]), &fam).unwrap();
        assert_eq!(res.tree.edge_count(), 3);
        assert_eq!(res.touched, BTreeSet::from([0]));
    }

    #[test]
    fn single_vertex_is_trivial() {
        let fg = FiniteGraph::path(["a", "b"]);
        let res = finite_connector(&fg, &ids(&["a"]), &[]).unwrap();
        assert_eq!(res.tree.vertex_count(), 1);
        assert_eq!(res.rounds, 0);
    }

    #[test]
    fn overlapping_members_rejected() {
        let fg = FiniteGraph::path(["a", "b", "c"]);
        let fam = vec![vec![edge("a", "b")], vec![edge("a", "b")]];
        assert!(finite_connector(&fg, &ids(&["a", "c"]), &fam).is_err());
    }
}
