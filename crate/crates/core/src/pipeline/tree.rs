//! Trees with infinitely many ends: peel off one double ray at a time while
//! keeping a residual component with infinitely many ends.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, FiniteGraph, LazyGraph, VertexId};
use crate::rays::{Checkpoints, DoubleRayStream, PathRun};

/// Record of one peeling step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeelStep {
    pub branch: VertexId,
    /// Neighbours of the branch vertex whose side reaches the audit depth.
    pub unbounded: Vec<VertexId>,
    /// Neighbour of the branch vertex inside the residual component.
    pub residual: VertexId,
    /// Unbounded sides at the residual component's first branch vertex.
    pub residual_branches: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeTrace {
    pub depth: usize,
    /// `true` when the input was replaced by a breadth-first spanning tree.
    pub spanning_tree: bool,
    pub steps: Vec<PeelStep>,
}

/// Lazily explored rooted tree with a growing set of deleted edges.
struct Walk<'a> {
    g: &'a LazyGraph,
    parent: HashMap<VertexId, Option<VertexId>>,
    depth: HashMap<VertexId, usize>,
    children: HashMap<VertexId, Arc<Vec<VertexId>>>,
    cut: HashSet<EdgeId>,
    target: usize,
}

impl<'a> Walk<'a> {
    fn new(g: &'a LazyGraph, target: usize) -> Self {
        let root = g.root().clone();
        Walk {
            g,
            parent: HashMap::from([(root.clone(), None)]),
            depth: HashMap::from([(root, 0)]),
            children: HashMap::new(),
            cut: HashSet::new(),
            target,
        }
    }

    fn children(&mut self, v: &VertexId) -> Result<Arc<Vec<VertexId>>> {
        if let Some(c) = self.children.get(v) {
            return Ok(c.clone());
        }
        let up = self.parent[v].clone();
        let d = self.depth[v];
        let mut out = Vec::new();
        for w in self.g.neighbors(v)? {
            if Some(&w) == up.as_ref() {
                continue;
            }
            match self.parent.get(&w) {
                Some(p) if p.as_ref() != Some(v) => {
                    return Err(Error::Input(format!("not a tree: {v} and {w} close a cycle")));
                }
                Some(_) => {}
                None => {
                    self.parent.insert(w.clone(), Some(v.clone()));
                    self.depth.insert(w.clone(), d + 1);
                }
            }
            out.push(w);
        }
        out.sort();
        let out = Arc::new(out);
        self.children.insert(v.clone(), out.clone());
        Ok(out)
    }

    fn is_cut(&self, u: &VertexId, v: &VertexId) -> bool {
        EdgeId::new(u.clone(), v.clone()).is_some_and(|e| self.cut.contains(&e))
    }

    /// Residual neighbours: children by id, then the parent.
    fn neighbors(&mut self, v: &VertexId) -> Result<Vec<VertexId>> {
        let mut out: Vec<VertexId> = self.children(v)?.iter().filter(|w| !self.is_cut(v, w)).cloned().collect();
        if let Some(p) = self.parent[v].clone() {
            if !self.is_cut(v, &p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Whether the side of `from` in the residual tree minus `avoid` reaches
    /// the target depth.
    fn reaches(&mut self, from: &VertexId, avoid: &VertexId) -> Result<bool> {
        let mut seen = HashSet::from([avoid.clone(), from.clone()]);
        let mut stack = vec![from.clone()];
        while let Some(x) = stack.pop() {
            if self.depth[&x] >= self.target {
                return Ok(true);
            }
            let nbrs = self.neighbors(&x)?;
            for y in nbrs.into_iter().rev() {
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        Ok(false)
    }

    fn unbounded_sides(&mut self, v: &VertexId) -> Result<Vec<VertexId>> {
        let mut out = Vec::new();
        for w in self.neighbors(v)? {
            if self.reaches(&w, v)? {
                out.push(w);
            }
        }
        Ok(out)
    }

    /// First vertex, in breadth-first order from `anchor` above the target
    /// depth, with at least three unbounded sides.
    fn branch_vertex(&mut self, anchor: &VertexId) -> Result<Option<(VertexId, Vec<VertexId>)>> {
        let mut seen = HashSet::from([anchor.clone()]);
        let mut queue = VecDeque::from([anchor.clone()]);
        while let Some(x) = queue.pop_front() {
            if self.depth[&x] >= self.target {
                continue;
            }
            let sides = self.unbounded_sides(&x)?;
            if sides.len() >= 3 {
                return Ok(Some((x, sides)));
            }
            for y in self.neighbors(&x)? {
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        Ok(None)
    }

    /// Descends from `w` through least children with unbounded subtrees.
    fn arm(&mut self, w: &VertexId) -> Result<Vec<VertexId>> {
        let mut out = vec![w.clone()];
        let mut x = w.clone();
        while self.depth[&x] < self.target {
            let mut next = None;
            for c in self.children(&x)?.iter() {
                if !self.is_cut(&x, c) && self.reaches(c, &x)? {
                    next = Some(c.clone());
                    break;
                }
            }
            let Some(c) = next else {
                return Err(Error::horizon("an unbounded descent", out.len(), None));
            };
            out.push(c.clone());
            x = c;
        }
        Ok(out)
    }
}

/// `[left, right]` arms of a double ray with root distances.
type Arms = [Vec<(VertexId, usize)>; 2];

/// One peeling run at one depth: `m` double rays and the steps taken.
fn peel(t: &LazyGraph, m: usize, depth: usize) -> Result<(Vec<Arms>, Vec<PeelStep>)> {
    let mut walk = Walk::new(t, depth);
    let mut anchor = t.root().clone();
    let mut rays = Vec::new();
    let mut steps: Vec<PeelStep> = Vec::new();
    let mut next = walk.branch_vertex(&anchor)?;
    while rays.len() < m {
        let Some((v, sides)) = next else {
            return Err(Error::horizon(
                "three unbounded branches at a residual vertex",
                rays.len(),
                Some(2 * depth.max(1)),
            ));
        };
        let up = walk.parent[&v].clone();
        let residual = match &up {
            Some(p) if sides.contains(p) => p.clone(),
            _ => sides.last().unwrap().clone(),
        };
        let through: Vec<VertexId> = sides.iter().filter(|w| **w != residual).take(2).cloned().collect();
        let left = walk.arm(&through[0])?;
        let right = walk.arm(&through[1])?;
        for w in through.iter().chain([&residual]) {
            walk.cut.insert(EdgeId::new(v.clone(), w.clone()).unwrap());
        }
        let with_depth = |walk: &Walk, p: &[VertexId]| p.iter().map(|x| (x.clone(), walk.depth[x])).collect::<Vec<_>>();
        let mut l = vec![v.clone()];
        l.extend(left);
        rays.push([with_depth(&walk, &l), with_depth(&walk, &right)]);
        anchor = residual.clone();
        next = walk.branch_vertex(&anchor)?;
        steps.push(PeelStep {
            branch: v,
            unbounded: sides,
            residual,
            residual_branches: next.as_ref().map_or(0, |n| n.1.len()),
        });
    }
    Ok((rays, steps))
}

/// Breadth-first spanning tree of a finite graph: each vertex hangs from its
/// least neighbour one step closer to the root.
pub fn bfs_spanning_tree(fg: &FiniteGraph, root: &VertexId) -> Result<FiniteGraph> {
    let r = fg
        .index_of(root)
        .ok_or_else(|| Error::Input(format!("root {root} is not in the graph")))?;
    let dist = fg.bfs_dist(&[r], |_| true);
    let mut edges = Vec::new();
    for v in 0..fg.vertex_count() {
        let Some(d) = dist[v] else { continue };
        if d == 0 {
            continue;
        }
        let p = fg.adj(v).iter().copied().find(|&u| dist[u] == Some(d - 1)).unwrap();
        edges.push(EdgeId::new(fg.id(p).clone(), fg.id(v).clone()).unwrap());
    }
    Ok(FiniteGraph::from_edges(edges))
}

/// `m` edge-disjoint double rays in a tree with infinitely many ends, streamed
/// over checkpoints. Trees are explored lazily up to depth `horizon`; other
/// graphs are replaced by the spanning tree of the audit ball of radius
/// `spanning_radius`.
pub fn tree_double_rays(
    t: &LazyGraph,
    m: usize,
    horizon: usize,
    spanning_radius: Option<usize>,
) -> Result<(Vec<DoubleRayStream>, Arc<Checkpoints>, TreeTrace)> {
    if !t.infinitely_many_ends() {
        return Err(Error::Input(format!(
            "{} is not declared to have infinitely many ends",
            t.name()
        )));
    }
    let (tree, depth) = match spanning_radius {
        None => (t.clone(), horizon),
        Some(r) => {
            let ball = t.ball(r)?;
            let st = Arc::new(bfs_spanning_tree(&ball.graph, t.root())?);
            let lazy = LazyGraph::new(format!("{}:bfs_tree", t.name()), t.root().clone(), move |v: &VertexId| {
                st.neighbors(v).cloned().collect()
            })
            .with_infinitely_many_ends(true);
            (lazy, horizon.min(r))
        }
    };
    let (first, steps) = peel(&tree, m, depth)?;
    let trace = TreeTrace {
        depth,
        spanning_tree: spanning_radius.is_some(),
        steps,
    };
    let centers: Vec<EdgeId> = first
        .iter()
        .map(|[l, r]| EdgeId::new(l[0].0.clone(), r[0].0.clone()).unwrap())
        .collect();
    let first_run: PathRun = first.into_iter().flatten().collect();
    let cap = spanning_radius;
    let cp = Checkpoints::start(depth, move |h| {
        if h == depth {
            return Ok(first_run.clone());
        }
        let h = cap.map_or(h, |r| h.min(r));
        let (rays, _) = peel(&tree, m, h)?;
        Ok(rays.into_iter().flatten().collect())
    })?;
    let streams = centers
        .into_iter()
        .enumerate()
        .map(|(i, c)| DoubleRayStream::new(c, cp.ray(2 * i), cp.ray(2 * i + 1)))
        .collect();
    Ok((streams, cp, trace))
}
