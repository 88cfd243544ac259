//! Horizon-indexed stream representations of rays, double rays and 2-rays.
//!
//! A stream is a recipe `horizon -> finite prefix`. Every recipe in this crate
//! is monotone: the prefix at a larger horizon extends the prefix at a smaller
//! one verbatim. Evaluations are memoised per horizon.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::graph::{path_edges, EdgeId, VertexId};

type Gen = dyn Fn(usize) -> Vec<VertexId> + Send + Sync;

/// Largest horizon probed when a stream's start vertex is requested.
const START_PROBE_LIMIT: usize = 1 << 16;

#[derive(Clone)]
pub struct RayStream {
    gen: Arc<Gen>,
    cache: Arc<RwLock<BTreeMap<usize, Arc<Vec<VertexId>>>>>,
}

impl fmt::Debug for RayStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cached: Vec<usize> = self.cache.read().unwrap().keys().copied().collect();
        f.debug_struct("RayStream").field("cached_horizons", &cached).finish()
    }
}

impl RayStream {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> Vec<VertexId> + Send + Sync + 'static,
    {
        RayStream {
            gen: Arc::new(f),
            cache: Arc::default(),
        }
    }

    /// A stream that reports the same prefix at every horizon.
    ///
    /// Used for prefixes that were computed at one fixed horizon.
    pub fn fixed(prefix: Vec<VertexId>) -> Self {
        let prefix = Arc::new(prefix);
        Self::from_fn(move |_| (*prefix).clone())
    }

    pub fn at(&self, horizon: usize) -> Arc<Vec<VertexId>> {
        if let Some(hit) = self.cache.read().unwrap().get(&horizon) {
            return hit.clone();
        }
        let value = Arc::new((self.gen)(horizon));
        self.cache
            .write()
            .unwrap()
            .entry(horizon)
            .or_insert(value)
            .clone()
    }

    /// Identity shared by clones of this stream.
    pub(crate) fn identity(&self) -> usize {
        Arc::as_ptr(&self.cache) as *const () as usize
    }

    /// First vertex, found by probing doubling horizons.
    pub fn start(&self) -> Option<VertexId> {
        let mut h = 0;
        loop {
            if let Some(v) = self.at(h).first() {
                return Some(v.clone());
            }
            if h >= START_PROBE_LIMIT {
                return None;
            }
            h = if h == 0 { 1 } else { h * 2 };
        }
    }

    /// Drops the first `drop` vertices.
    pub fn tail(&self, drop: usize) -> RayStream {
        if drop == 0 {
            return self.clone();
        }
        let parent = self.clone();
        RayStream::from_fn(move |h| parent.at(h).iter().skip(drop).cloned().collect())
    }

    /// Tail starting at the first occurrence of `v` (empty prefixes until `v` shows up).
    pub fn tail_from(&self, v: VertexId) -> RayStream {
        let parent = self.clone();
        RayStream::from_fn(move |h| {
            let p = parent.at(h);
            match p.iter().position(|x| *x == v) {
                Some(i) => p[i..].to_vec(),
                None => Vec::new(),
            }
        })
    }

    pub fn export(&self, horizon: usize) -> RayExport {
        let vertices = (*self.at(horizon)).clone();
        RayExport {
            start: vertices.first().cloned(),
            vertices,
            horizon,
        }
    }
}

/// Removes the first `drop` vertices of a ray.
pub fn tail_of(r: &RayStream, drop: usize) -> RayStream {
    r.tail(drop)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayExport {
    pub start: Option<VertexId>,
    pub vertices: Vec<VertexId>,
    pub horizon: usize,
}

/// Finite approximation of a double ray: two arms leaving the endpoints of a
/// center edge. `left[0]` and `right[0]` are the center endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleRayPrefix {
    pub left: Vec<VertexId>,
    pub right: Vec<VertexId>,
}

impl DoubleRayPrefix {
    /// Whole path, from the deep end of the left arm to the deep end of the right arm.
    pub fn vertices(&self) -> Vec<VertexId> {
        self.left.iter().rev().chain(self.right.iter()).cloned().collect()
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        path_edges(&self.vertices()).collect()
    }

    pub fn is_simple(&self) -> bool {
        let vs = self.vertices();
        let set: std::collections::HashSet<&VertexId> = vs.iter().collect();
        set.len() == vs.len()
    }

    /// Both arms extend the arms of `earlier` verbatim.
    pub fn extends(&self, earlier: &DoubleRayPrefix) -> bool {
        self.left.starts_with(&earlier.left) && self.right.starts_with(&earlier.right)
    }
}

#[derive(Clone, Debug)]
pub struct DoubleRayStream {
    center: EdgeId,
    left: RayStream,
    right: RayStream,
}

impl DoubleRayStream {
    /// `left` must start at `center.0`-side endpoint `l`, `right` at the other one.
    pub fn new(center: EdgeId, left: RayStream, right: RayStream) -> Self {
        DoubleRayStream {
            center,
            left,
            right,
        }
    }

    pub fn center(&self) -> &EdgeId {
        &self.center
    }

    pub fn left(&self) -> &RayStream {
        &self.left
    }

    pub fn right(&self) -> &RayStream {
        &self.right
    }

    pub fn at(&self, horizon: usize) -> DoubleRayPrefix {
        DoubleRayPrefix {
            left: (*self.left.at(horizon)).clone(),
            right: (*self.right.at(horizon)).clone(),
        }
    }

    pub fn export(&self, horizon: usize) -> DoubleRayExport {
        let p = self.at(horizon);
        let (u, v) = self.center.endpoints();
        DoubleRayExport {
            center: [u.clone(), v.clone()],
            vertices: p.vertices(),
            horizon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleRayExport {
    pub center: [VertexId; 2],
    pub vertices: Vec<VertexId>,
    pub horizon: usize,
}

/// Finite approximation of a 2-ray.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoRayPrefix {
    pub first: Vec<VertexId>,
    pub second: Vec<VertexId>,
}

impl TwoRayPrefix {
    pub fn is_vertex_disjoint(&self) -> bool {
        let a: std::collections::HashSet<&VertexId> = self.first.iter().collect();
        self.second.iter().all(|v| !a.contains(v))
    }

    pub fn edges(&self) -> Vec<EdgeId> {
        path_edges(&self.first).chain(path_edges(&self.second)).collect()
    }

    pub fn extends(&self, earlier: &TwoRayPrefix) -> bool {
        self.first.starts_with(&earlier.first) && self.second.starts_with(&earlier.second)
    }
}

#[derive(Clone, Debug)]
pub struct TwoRayStream {
    pub first: RayStream,
    pub second: RayStream,
}

impl TwoRayStream {
    pub fn new(first: RayStream, second: RayStream) -> Self {
        TwoRayStream { first, second }
    }

    pub fn fixed(prefix: TwoRayPrefix) -> Self {
        TwoRayStream {
            first: RayStream::fixed(prefix.first),
            second: RayStream::fixed(prefix.second),
        }
    }

    pub fn at(&self, horizon: usize) -> TwoRayPrefix {
        TwoRayPrefix {
            first: (*self.first.at(horizon)).clone(),
            second: (*self.second.at(horizon)).clone(),
        }
    }
}

type FamilyFn = dyn Fn(usize) -> Vec<DoubleRayStream> + Send + Sync;

/// Produces, for each `i`, a family of `i` pairwise edge-disjoint double rays.
#[derive(Clone)]
pub struct FamilyGenerator {
    name: String,
    produce: Arc<FamilyFn>,
}

impl fmt::Debug for FamilyGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilyGenerator").field("name", &self.name).finish()
    }
}

impl FamilyGenerator {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> Vec<DoubleRayStream> + Send + Sync + 'static,
    {
        FamilyGenerator {
            name: name.into(),
            produce: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn produce(&self, i: usize) -> Vec<DoubleRayStream> {
        (self.produce)(i)
    }
}

/// True when no edge appears in two of the given edge lists.
pub fn pairwise_edge_disjoint<I>(items: I) -> bool
where
    I: IntoIterator<Item = Vec<EdgeId>>,
{
    let mut seen = std::collections::HashSet::new();
    for edges in items {
        let own: std::collections::HashSet<EdgeId> = edges.into_iter().collect();
        for e in own {
            if !seen.insert(e) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting() -> RayStream {
        RayStream::from_fn(|h| (0..=h).map(|i| VertexId::new(format!("a:{i}"))).collect())
    }

    #[test]
    fn tail_identity_and_composition() {
        let r = counting();
        assert_eq!(tail_of(&r, 0).at(7), r.at(7));
        assert_eq!(tail_of(&tail_of(&r, 2), 3).at(9), tail_of(&r, 5).at(9));
        assert_eq!(tail_of(&r, 4).start().unwrap().as_str(), "a:4");
    }

    #[test]
    fn memoised_values_are_shared() {
        let r = counting();
        let a = r.at(5);
        let b = r.clone().at(5);
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn edge_disjointness_audit() {
        let p1: Vec<VertexId> = ["a", "b", "c"].iter().map(VertexId::new).collect();
        let p2: Vec<VertexId> = ["c", "b", "d"].iter().map(VertexId::new).collect();
        let e1: Vec<EdgeId> = path_edges(&p1).collect();
        let e2: Vec<EdgeId> = path_edges(&p2).collect();
        assert!(!pairwise_edge_disjoint([e1.clone(), e2]));
        assert!(pairwise_edge_disjoint([e1, Vec::new()]));
    }
}
