use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::finite::FiniteGraph;
use super::vertex::{EdgeId, VertexId};
use crate::error::{Error, Result};
use crate::rays::RayStream;

pub const DEFAULT_DEGREE_BOUND: usize = 1_000_000;

/// Balls kept per graph; pipelines revisit a handful of radii.
const BALL_CACHE: usize = 6;

pub type Oracle = Arc<dyn Fn(&VertexId) -> Vec<VertexId> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndDegree {
    Finite(usize),
    Thick(ThickTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThickTag {
    Thick,
}

impl EndDegree {
    pub fn finite(self) -> Option<usize> {
        match self {
            EndDegree::Finite(k) => Some(k),
            EndDegree::Thick(_) => None,
        }
    }

    pub fn thick() -> Self {
        EndDegree::Thick(ThickTag::Thick)
    }
}

/// Declared end. `witness_rays` holds vertex-disjoint rays converging to the
/// end; the first one is the end's witness ray.
#[derive(Debug, Clone)]
pub struct EndDecl {
    pub end_id: usize,
    pub vertex_degree: EndDegree,
    pub witness_rays: Vec<RayStream>,
}

impl EndDecl {
    pub fn witness_ray(&self) -> Option<&RayStream> {
        self.witness_rays.first()
    }
}

/// A locally finite graph given by a neighbour oracle.
#[derive(Clone)]
pub struct LazyGraph {
    name: String,
    root: VertexId,
    oracle: Oracle,
    ends: Vec<EndDecl>,
    infinitely_many_ends: bool,
    degree_bound: usize,
    params: serde_json::Value,
    balls: Arc<Mutex<BTreeMap<usize, Arc<Ball>>>>,
}

impl fmt::Debug for LazyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyGraph")
            .field("name", &self.name)
            .field("root", &self.root)
            .field("ends", &self.ends)
            .field("infinitely_many_ends", &self.infinitely_many_ends)
            .finish()
    }
}

impl LazyGraph {
    pub fn new<F>(name: impl Into<String>, root: VertexId, oracle: F) -> Self
    where
        F: Fn(&VertexId) -> Vec<VertexId> + Send + Sync + 'static,
    {
        LazyGraph {
            name: name.into(),
            root,
            oracle: Arc::new(oracle),
            ends: Vec::new(),
            infinitely_many_ends: false,
            degree_bound: DEFAULT_DEGREE_BOUND,
            params: serde_json::Value::Null,
            balls: Arc::default(),
        }
    }

    pub fn with_ends(mut self, ends: Vec<EndDecl>) -> Self {
        self.ends = ends;
        self
    }

    pub fn with_infinitely_many_ends(mut self, flag: bool) -> Self {
        self.infinitely_many_ends = flag;
        self
    }

    pub fn with_degree_bound(mut self, bound: usize) -> Self {
        self.degree_bound = bound;
        self.balls = Arc::default();
        self
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_root(mut self, root: VertexId) -> Self {
        self.root = root;
        self.balls = Arc::default();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> &VertexId {
        &self.root
    }

    pub fn ends(&self) -> &[EndDecl] {
        &self.ends
    }

    pub fn end(&self, end_id: usize) -> Option<&EndDecl> {
        self.ends.iter().find(|e| e.end_id == end_id)
    }

    pub fn infinitely_many_ends(&self) -> bool {
        self.infinitely_many_ends
    }

    pub fn params(&self) -> &serde_json::Value {
        &self.params
    }

    /// Raw oracle call, checked against the local-finiteness bound.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let list = (self.oracle)(v);
        if list.len() > self.degree_bound {
            return Err(Error::OracleFault {
                vertex: v.clone(),
                reason: format!(
                    "neighbour list of length {} exceeds the bound {}",
                    list.len(),
                    self.degree_bound
                ),
            });
        }
        Ok(list)
    }

    /// BFS ball of radius `n` around the root.
    pub fn ball(&self, n: usize) -> Result<Arc<Ball>> {
        if let Some(b) = self.balls.lock().unwrap().get(&n) {
            return Ok(b.clone());
        }
        let ball = Arc::new(Ball::build(self, n)?);
        let mut cache = self.balls.lock().unwrap();
        if cache.len() >= BALL_CACHE {
            let smallest = *cache.keys().next().unwrap();
            cache.remove(&smallest);
        }
        cache.insert(n, ball.clone());
        Ok(ball)
    }

    /// Restriction to the vertices accepted by `keep`, rooted at `root`.
    pub fn restrict<F>(&self, name: impl Into<String>, root: VertexId, keep: F) -> LazyGraph
    where
        F: Fn(&VertexId) -> bool + Send + Sync + 'static,
    {
        let parent = self.oracle.clone();
        let keep = Arc::new(keep);
        let k2 = keep.clone();
        let mut g = LazyGraph::new(name, root, move |v: &VertexId| {
            if !k2(v) {
                return Vec::new();
            }
            parent(v).into_iter().filter(|w| keep(w)).collect()
        });
        g.degree_bound = self.degree_bound;
        g
    }

    /// Spanning subgraph keeping the edges `uv` accepted by `keep(u, v)`,
    /// rooted at `root`. `keep` must be symmetric.
    pub fn restrict_edges<F>(&self, name: impl Into<String>, root: VertexId, keep: F) -> LazyGraph
    where
        F: Fn(&VertexId, &VertexId) -> bool + Send + Sync + 'static,
    {
        let parent = self.oracle.clone();
        let mut g = LazyGraph::new(name, root, move |v: &VertexId| {
            parent(v).into_iter().filter(|w| keep(v, w)).collect()
        });
        g.degree_bound = self.degree_bound;
        g
    }
}

/// Subgraph induced on the BFS ball of radius `n` around the root.
pub fn truncate(g: &LazyGraph, n: usize) -> Result<FiniteGraph> {
    Ok(g.ball(n)?.graph.clone())
}

/// A truncation together with root distances and the BFS enumeration.
#[derive(Debug, Clone)]
pub struct Ball {
    pub graph: FiniteGraph,
    pub root: VertexId,
    dist: Vec<usize>,
    order: Vec<usize>,
}

impl Ball {
    fn build(g: &LazyGraph, n: usize) -> Result<Ball> {
        let mut dist: HashMap<VertexId, usize> = HashMap::new();
        let mut nbrs: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        let mut order: Vec<VertexId> = Vec::new();
        let mut queue = VecDeque::new();
        dist.insert(g.root.clone(), 0);
        queue.push_back(g.root.clone());
        while let Some(v) = queue.pop_front() {
            order.push(v.clone());
            let d = dist[&v];
            let mut list = g.neighbors(&v)?;
            list.sort();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::OracleFault {
                    vertex: v,
                    reason: "duplicate neighbour".into(),
                });
            }
            if list.binary_search(&v).is_ok() {
                return Err(Error::OracleFault {
                    vertex: v,
                    reason: "self-loop".into(),
                });
            }
            if d < n {
                for w in &list {
                    if !dist.contains_key(w) {
                        dist.insert(w.clone(), d + 1);
                        queue.push_back(w.clone());
                    }
                }
            }
            nbrs.insert(v, list);
        }
        let mut edges = Vec::new();
        for (v, list) in &nbrs {
            for w in list {
                if let Some(back) = nbrs.get(w) {
                    if back.binary_search(v).is_err() {
                        return Err(Error::OracleFault {
                            vertex: v.clone(),
                            reason: format!("asymmetric adjacency: {w} missing {v}"),
                        });
                    }
                    if v < w {
                        edges.push(EdgeId::new(v.clone(), w.clone()).unwrap());
                    }
                }
            }
        }
        let graph = FiniteGraph::new(order.iter().cloned(), edges)?.with_radius(n);
        let dist_vec = graph.vertices().iter().map(|v| dist[v]).collect();
        let order = order.iter().map(|v| graph.index_of(v).unwrap()).collect();
        Ok(Ball {
            graph,
            root: g.root.clone(),
            dist: dist_vec,
            order,
        })
    }

    /// Ball structure for a standalone finite graph, BFS from `root`.
    /// Vertices unreachable from the root are dropped.
    pub fn from_graph(graph: &FiniteGraph, root: &VertexId) -> Result<Ball> {
        let Some(r) = graph.index_of(root) else {
            return Err(Error::Input(format!("root {root} not in graph")));
        };
        let d = graph.bfs_dist(&[r], |_| true);
        let g = graph.induced(|v| d[graph.index_of(v).unwrap()].is_some());
        let dist = g.bfs_dist(&[g.index_of(root).unwrap()], |_| true);
        let mut order = vec![g.index_of(root).unwrap()];
        let mut seen = vec![false; g.vertex_count()];
        seen[order[0]] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in g.adj(v) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        let radius = dist.iter().flatten().copied().max().unwrap_or(0);
        Ok(Ball {
            graph: g.with_radius(radius),
            root: root.clone(),
            dist: dist.into_iter().map(Option::unwrap).collect(),
            order,
        })
    }

    pub fn radius(&self) -> usize {
        self.graph.radius()
    }

    pub fn dist(&self, v: &VertexId) -> Option<usize> {
        self.graph.index_of(v).map(|i| self.dist[i])
    }

    pub fn dist_idx(&self, i: usize) -> usize {
        self.dist[i]
    }

    /// Vertex indices in BFS order (neighbours visited in id order).
    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    /// Vertices at distance exactly the radius.
    pub fn boundary(&self) -> Vec<usize> {
        let r = self.radius();
        (0..self.graph.vertex_count())
            .filter(|&i| self.dist[i] == r)
            .collect()
    }

    /// Longest initial segment of `path` inside the ball.
    pub fn clip<'a>(&self, path: &'a [VertexId]) -> &'a [VertexId] {
        let k = path
            .iter()
            .position(|v| !self.graph.contains(v))
            .unwrap_or(path.len());
        &path[..k]
    }
}
