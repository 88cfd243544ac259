use std::collections::BTreeSet;

use edray_core::connectors::finite_connector;
use edray_core::graph::{components, edge_disjoint_paths, min_vertex_cut, EdgeId, FiniteGraph, PathPacking, VertexId};
use edray_core::pipeline::suite::random_connector_case;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(i: usize) -> VertexId {
    VertexId::from(format!("v{i}"))
}

fn graph(n: usize, pairs: &[(usize, usize)]) -> FiniteGraph {
    let edges: Vec<EdgeId> = pairs.iter().filter_map(|&(a, b)| EdgeId::new(v(a % n), v(b % n))).collect();
    FiniteGraph::new((0..n).map(v), edges).unwrap()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

/// Whether some vertex of `from` reaches some vertex of `to` avoiding `removed`
/// and the edges in `cut_edges`.
fn connected(fg: &FiniteGraph, removed: u32, cut_edges: &BTreeSet<(usize, usize)>, from: &[usize], to: &[usize]) -> bool {
    let n = fg.vertex_count();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for &j in fg.adj(i) {
            let gone = removed >> i & 1 == 1 || removed >> j & 1 == 1 || cut_edges.contains(&(i.min(j), i.max(j)));
            if !gone {
                uf.union(i, j);
            }
        }
    }
    from.iter()
        .filter(|&&a| removed >> a & 1 == 0)
        .any(|&a| to.iter().filter(|&&b| removed >> b & 1 == 0).any(|&b| uf.find(a) == uf.find(b)))
}

fn brute_vertex_cut(fg: &FiniteGraph, from: &[usize], to: &[usize]) -> usize {
    let n = fg.vertex_count();
    (0u32..1 << n)
        .filter(|&x| !connected(fg, x, &BTreeSet::new(), from, to))
        .map(|x| x.count_ones() as usize)
        .min()
        .unwrap()
}

fn brute_edge_cut(fg: &FiniteGraph, s: usize, t: usize) -> usize {
    let edges: Vec<(usize, usize)> = (0..fg.vertex_count())
        .flat_map(|i| fg.adj(i).iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
        .collect();
    (0u32..1 << edges.len())
        .filter(|&mask| {
            let cut: BTreeSet<(usize, usize)> =
                edges.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, e)| *e).collect();
            !connected(fg, 0, &cut, &[s], &[t])
        })
        .map(|m| m.count_ones() as usize)
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_vertex_cut_matches_brute_force(
        n in 2usize..9,
        pairs in prop::collection::vec((0usize..9, 0usize..9), 0..20),
        a in prop::collection::btree_set(0usize..9, 1..3),
        b in prop::collection::btree_set(0usize..9, 1..3),
    ) {
        let fg = graph(n, &pairs);
        let from: Vec<usize> = a.iter().map(|x| x % n).collect();
        let to: Vec<usize> = b.iter().map(|x| x % n).collect();
        prop_assume!(from.iter().all(|x| !to.contains(x)));
        let src: BTreeSet<VertexId> = from.iter().map(|&i| v(i)).collect();
        let snk: BTreeSet<VertexId> = to.iter().map(|&i| v(i)).collect();
        let cut = min_vertex_cut(&fg, &src, &snk).unwrap();
        prop_assert_eq!(cut.order(), brute_vertex_cut(&fg, &from, &to));
        let mask = cut.cut.iter().map(|x| 1u32 << fg.index_of(x).unwrap()).fold(0, |m, b| m | b);
        prop_assert!(!connected(&fg, mask, &BTreeSet::new(), &from, &to));
    }

    #[test]
    fn edge_packing_matches_min_edge_cut(
        n in 2usize..8,
        pairs in prop::collection::vec((0usize..8, 0usize..8), 0..12),
    ) {
        let fg = graph(n, &pairs);
        let packing = PathPacking {
            graph: &fg,
            sources: vec![(0, 64)],
            sinks: vec![n - 1],
            unit_vertices: None,
            edge_ok: None,
            limit: 64,
        };
        let paths = edge_disjoint_paths(&packing);
        prop_assert_eq!(paths.len(), brute_edge_cut(&fg, 0, n - 1));
        let mut used = BTreeSet::new();
        for p in &paths {
            prop_assert_eq!(p[0], 0);
            prop_assert_eq!(*p.last().unwrap(), n - 1);
            prop_assert_eq!(p.iter().collect::<BTreeSet<_>>().len(), p.len());
            for w in p.windows(2) {
                prop_assert!(fg.adj(w[0]).contains(&w[1]));
                prop_assert!(used.insert((w[0].min(w[1]), w[0].max(w[1]))));
            }
        }
    }

    #[test]
    fn components_match_union_find(
        n in 1usize..12,
        pairs in prop::collection::vec((0usize..12, 0usize..12), 0..24),
        removed in prop::collection::btree_set(0usize..12, 0..4),
    ) {
        let fg = graph(n, &pairs);
        let removed: BTreeSet<VertexId> = removed.into_iter().filter(|&i| i < n).map(v).collect();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for &j in fg.adj(i) {
                if !removed.contains(fg.id(i)) && !removed.contains(fg.id(j)) {
                    uf.union(i, j);
                }
            }
        }
        let mut want: Vec<Vec<VertexId>> = Vec::new();
        for root in 0..n {
            let mut comp: Vec<VertexId> = (0..n)
                .filter(|&i| !removed.contains(fg.id(i)) && uf.find(i) == root)
                .map(|i| fg.id(i).clone())
                .collect();
            comp.sort();
            if !comp.is_empty() {
                want.push(comp);
            }
        }
        want.sort();
        let mut got = components(&fg, &removed);
        got.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn connectors_respect_their_contract(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = random_connector_case(&mut rng, 40);
        let r = finite_connector(&case.graph, &case.terminals, &case.family).unwrap();
        let t = &r.tree;
        let n = t.vertex_count();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for &j in t.adj(i) {
                uf.union(i, j);
            }
        }
        let roots: BTreeSet<usize> = (0..n).map(|i| uf.find(i)).collect();
        prop_assert_eq!(roots.len(), 1);
        for s in &case.terminals {
            prop_assert!(t.contains(s));
        }
        prop_assert!(r.touched.len() <= 2 * case.terminals.len() - 2);
        let tree_edges: BTreeSet<EdgeId> = t.edges().into_iter().collect();
        for (i, member) in case.family.iter().enumerate() {
            if !r.touched.contains(&i) {
                prop_assert!(member.iter().all(|e| !tree_edges.contains(e)));
            }
        }
        for e in &tree_edges {
            let (a, b) = e.endpoints();
            prop_assert!(case.graph.has_edge(a, b));
        }
    }
}
