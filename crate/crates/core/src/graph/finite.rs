use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::vertex::{EdgeId, VertexId};
use crate::error::{Error, Result};

/// A finite simple graph with a deterministic vertex indexing.
///
/// Vertices are stored sorted by [`VertexId`] order and adjacency lists are
/// sorted by index, so index order and id order agree. All algorithms that
/// break ties "by least vertex" can therefore just take the least index.
#[derive(Debug, Clone, Default)]
pub struct FiniteGraph {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
    radius: usize,
}

impl PartialEq for FiniteGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.adj == other.adj && self.radius == other.radius
    }
}

impl Eq for FiniteGraph {}

impl FiniteGraph {
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = EdgeId>,
    {
        let vs: BTreeSet<VertexId> = vertices.into_iter().collect();
        let ids: Vec<VertexId> = vs.into_iter().collect();
        let index: HashMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for e in edges {
            let (u, v) = e.endpoints();
            let (Some(&iu), Some(&iv)) = (index.get(u), index.get(v)) else {
                return Err(Error::Input(format!("edge {e} has an endpoint outside the vertex set")));
            };
            adj[iu].push(iv);
            adj[iv].push(iu);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(FiniteGraph {
            ids,
            index,
            adj,
            radius: 0,
        })
    }

    /// Graph spanned by the given edges.
    pub fn from_edges<E: IntoIterator<Item = EdgeId>>(edges: E) -> Self {
        let edges: Vec<EdgeId> = edges.into_iter().collect();
        let vertices: Vec<VertexId> = edges
            .iter()
            .flat_map(|e| {
                let (u, v) = e.endpoints();
                [u.clone(), v.clone()]
            })
            .collect();
        Self::new(vertices, edges).expect("endpoints are vertices by construction")
    }

    /// Path graph on the given vertex sequence.
    pub fn path<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<VertexId>,
    {
        let vs: Vec<VertexId> = names.into_iter().map(Into::into).collect();
        let edges: Vec<EdgeId> = super::path_edges(&vs).collect();
        Self::new(vs, edges).expect("path edges join path vertices")
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = radius;
        self
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.index.contains_key(v)
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn id(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    pub fn adj(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn neighbors<'a>(&'a self, v: &VertexId) -> impl Iterator<Item = &'a VertexId> + 'a {
        let list: &[usize] = match self.index.get(v) {
            Some(&i) => &self.adj[i],
            None => &[],
        };
        list.iter().map(move |&j| &self.ids[j])
    }

    pub fn degree(&self, v: &VertexId) -> usize {
        self.index.get(v).map_or(0, |&i| self.adj[i].len())
    }

    pub fn has_edge(&self, u: &VertexId, v: &VertexId) -> bool {
        match (self.index.get(u), self.index.get(v)) {
            (Some(&iu), Some(&iv)) => self.adj[iu].binary_search(&iv).is_ok(),
            _ => false,
        }
    }

    /// All edges, sorted.
    pub fn edges(&self) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                if i < j {
                    out.push(EdgeId::new(self.ids[i].clone(), self.ids[j].clone()).unwrap());
                }
            }
        }
        out.sort();
        out
    }

    pub fn induced<F: Fn(&VertexId) -> bool>(&self, keep: F) -> FiniteGraph {
        let kept: Vec<usize> = (0..self.ids.len()).filter(|&i| keep(&self.ids[i])).collect();
        let mut remap = vec![usize::MAX; self.ids.len()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let ids: Vec<VertexId> = kept.iter().map(|&i| self.ids[i].clone()).collect();
        let index = ids.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let adj = kept
            .iter()
            .map(|&old| {
                self.adj[old]
                    .iter()
                    .filter(|&&j| remap[j] != usize::MAX)
                    .map(|&j| remap[j])
                    .collect()
            })
            .collect();
        FiniteGraph {
            ids,
            index,
            adj,
            radius: self.radius,
        }
    }

    /// Subgraph keeping every vertex but only the edges accepted by `keep`.
    pub fn filter_edges<F: Fn(&VertexId, &VertexId) -> bool>(&self, keep: F) -> FiniteGraph {
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(i, list)| {
                list.iter()
                    .copied()
                    .filter(|&j| keep(&self.ids[i], &self.ids[j]))
                    .collect()
            })
            .collect();
        FiniteGraph {
            ids: self.ids.clone(),
            index: self.index.clone(),
            adj,
            radius: self.radius,
        }
    }

    pub fn is_induced_subgraph_of(&self, other: &FiniteGraph) -> bool {
        self.ids.iter().all(|v| other.contains(v))
            && self.edges().iter().all(|e| {
                let (u, v) = e.endpoints();
                other.has_edge(u, v)
            })
            && other.edges().iter().all(|e| {
                let (u, v) = e.endpoints();
                !(self.contains(u) && self.contains(v)) || self.has_edge(u, v)
            })
    }

    pub fn is_connected(&self) -> bool {
        self.ids.is_empty() || components(self, &BTreeSet::new()).len() == 1
    }

    /// BFS distances (in edges) from a set of sources, restricted to vertices
    /// accepted by `allowed`. Unreached vertices get `None`.
    pub fn bfs_dist<F: Fn(usize) -> bool>(&self, sources: &[usize], allowed: F) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.ids.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if allowed(s) && dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adj[v] {
                if dist[w].is_none() && allowed(w) {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn to_export(&self) -> GraphExport {
        GraphExport {
            vertices: self.ids.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|e| {
                    let (u, v) = e.endpoints();
                    [u.clone(), v.clone()]
                })
                .collect(),
            radius: self.radius,
        }
    }

    pub fn from_export(ex: &GraphExport) -> Result<Self> {
        let edges = ex
            .edges
            .iter()
            .map(|[u, v]| {
                EdgeId::new(u.clone(), v.clone())
                    .ok_or_else(|| Error::Input(format!("self-loop at {u}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(ex.vertices.iter().cloned(), edges)?.with_radius(ex.radius))
    }
}

/// JSON form of a [`FiniteGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
    pub radius: usize,
}

/// Connected components of `fg - removed`, each sorted, ordered by least vertex.
pub fn components(fg: &FiniteGraph, removed: &BTreeSet<VertexId>) -> Vec<Vec<VertexId>> {
    let n = fg.vertex_count();
    let blocked: Vec<bool> = (0..n).map(|i| removed.contains(fg.id(i))).collect();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if blocked[start] || comp[start] != usize::MAX {
            continue;
        }
        let c = out.len();
        let mut members = vec![start];
        comp[start] = c;
        let mut head = 0;
        while head < members.len() {
            let v = members[head];
            head += 1;
            for &w in fg.adj(v) {
                if !blocked[w] && comp[w] == usize::MAX {
                    comp[w] = c;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| fg.id(i).clone()).collect());
    }
    // starts are scanned in index order, so components already come sorted by least vertex
    out
}
