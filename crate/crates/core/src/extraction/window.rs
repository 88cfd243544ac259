//! Index-level view of a capturing sequence on one truncation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Ball, LazyGraph, VertexId};
use crate::separations::{capture_upto, CapturingSequence, Side};
use crate::shapes::{Letter, TwoLink, TwoShape, Word};

pub(crate) const NONE: u32 = u32::MAX;

/// Compact word: vertex indices alternating with letter codes.
pub(crate) type Key = Box<[u32]>;

fn letter_code(l: Letter) -> u32 {
    match l {
        Letter::L => NONE - 3,
        Letter::M => NONE - 2,
        Letter::R => NONE - 1,
    }
}

fn code_letter(c: u32) -> Letter {
    match NONE - c {
        3 => Letter::L,
        2 => Letter::M,
        _ => Letter::R,
    }
}

/// A capturing sequence whose separations share one truncation, with
/// per-vertex level and separator tables.
#[derive(Debug, Clone)]
pub struct Window {
    seq: CapturingSequence,
    ball: Arc<Ball>,
    level: Vec<u32>,
    xsep: Vec<u32>,
}

impl Window {
    pub fn new(seq: CapturingSequence) -> Result<Window> {
        let Some(first) = seq.seps.first() else {
            return Err(Error::Input("a window needs at least one separation".into()));
        };
        let ball = first.ball().clone();
        if !seq.seps.iter().all(|s| Arc::ptr_eq(s.ball(), &ball)) {
            return Err(Error::Input("separations of a window must share one truncation".into()));
        }
        let n = ball.graph.vertex_count();
        let mut level = vec![NONE; n];
        let mut xsep = vec![NONE; n];
        for (p, sep) in seq.seps.iter().enumerate() {
            for v in 0..n {
                let s = sep.side_idx(v);
                if s != Side::B && level[v] == NONE {
                    level[v] = p as u32;
                }
                if s == Side::X {
                    if xsep[v] != NONE {
                        return Err(Error::Input(format!(
                            "separators {} and {p} share {}",
                            xsep[v],
                            ball.graph.id(v)
                        )));
                    }
                    xsep[v] = p as u32;
                }
            }
        }
        Ok(Window { seq, ball, level, xsep })
    }

    /// Captures as many separations of `end_id` as fit in the `horizon` ball.
    pub fn capture(g: &LazyGraph, end_id: usize, horizon: usize) -> Result<Window> {
        let seq = capture_upto(g, end_id, usize::MAX, horizon)?;
        if seq.is_empty() {
            return Err(Error::horizon(
                format!("a separation of end {end_id}"),
                0,
                Some(2 * horizon.max(4)),
            ));
        }
        Window::new(seq)
    }

    pub fn seq(&self) -> &CapturingSequence {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.ball.radius()
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn k(&self) -> usize {
        self.seq.k
    }

    pub(crate) fn level(&self, v: usize) -> u32 {
        self.level[v]
    }

    pub(crate) fn side(&self, sep: usize, v: usize) -> Side {
        if self.xsep[v] == sep as u32 {
            Side::X
        } else if self.level[v] <= sep as u32 {
            Side::A
        } else {
            Side::B
        }
    }

    pub(crate) fn edge_side(&self, sep: usize, u: usize, v: usize) -> Side {
        if self.side(sep, u) == Side::A || self.side(sep, v) == Side::A {
            Side::A
        } else {
            Side::B
        }
    }

    pub(crate) fn separator(&self, sep: usize) -> &[VertexId] {
        self.seq.seps[sep].separator()
    }

    pub(crate) fn id(&self, v: usize) -> &VertexId {
        self.ball.graph.id(v)
    }

    pub(crate) fn ids(&self, path: &[usize]) -> Vec<VertexId> {
        path.iter().map(|&v| self.id(v).clone()).collect()
    }

    /// Longest initial segment inside the truncation, as indices.
    pub(crate) fn index_path(&self, path: &[VertexId]) -> Vec<usize> {
        path.iter().map_while(|v| self.ball.graph.index_of(v)).collect()
    }

    /// Nonempty and ending beyond every separation.
    pub(crate) fn clears(&self, path: &[usize]) -> bool {
        path.last().is_some_and(|&v| self.level[v] == NONE)
    }

    fn lefty_start(&self, path: &[usize], floor: u32) -> usize {
        let from = path
            .iter()
            .rposition(|&v| self.level[v] < floor)
            .map_or(0, |i| i + 1);
        let min = path[from..].iter().map(|&v| self.level[v]).min().unwrap_or(NONE);
        if min == NONE {
            return from;
        }
        from + path[from..].iter().rposition(|&v| self.level[v] == min).unwrap()
    }

    /// Start offsets making two clearing paths lefty, after dropping every
    /// vertex up to the last one of level below `floor`.
    pub(crate) fn lefty_starts(&self, a: &[usize], b: &[usize], mut floor: u32) -> (usize, usize) {
        loop {
            let (sa, sb) = (self.lefty_start(a, floor), self.lefty_start(b, floor));
            let (la, lb) = (self.level[a[sa]], self.level[b[sb]]);
            if la == lb {
                return (sa, sb);
            }
            floor = la.max(lb);
        }
    }

    /// Positions of the path on each separator it meets.
    pub(crate) fn hits(&self, path: &[usize]) -> BTreeMap<u32, Vec<usize>> {
        let mut hits: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &v) in path.iter().enumerate() {
            if self.xsep[v] != NONE {
                hits.entry(self.xsep[v]).or_default().push(i);
            }
        }
        hits
    }

    /// Shape on `sep` read off the path's positions on it.
    pub(crate) fn shape_key(&self, path: &[usize], sep: u32, pos: &[usize]) -> Key {
        let mut key = Vec::with_capacity(2 * pos.len());
        for (n, &i) in pos.iter().enumerate() {
            if n > 0 {
                let s = self.edge_side(sep as usize, path[pos[n - 1]], path[pos[n - 1] + 1]);
                key.push(letter_code(if s == Side::A { Letter::L } else { Letter::R }));
            }
            key.push(path[i] as u32);
        }
        key.into_boxed_slice()
    }

    /// Link induced on separators `s1 < s2`.
    pub(crate) fn link(&self, path: &[usize], s1: usize, s2: usize) -> Key {
        let pos: Vec<usize> = (0..path.len())
            .filter(|&i| {
                let x = self.xsep[path[i]];
                x == s1 as u32 || x == s2 as u32
            })
            .collect();
        let mut key = Vec::with_capacity(2 * pos.len());
        for (n, &i) in pos.iter().enumerate() {
            if n > 0 {
                let (u, v) = (path[pos[n - 1]], path[pos[n - 1] + 1]);
                let l = if self.edge_side(s1, u, v) == Side::A {
                    Letter::L
                } else if self.edge_side(s2, u, v) == Side::B {
                    Letter::R
                } else {
                    Letter::M
                };
                key.push(letter_code(l));
            }
            key.push(path[i] as u32);
        }
        key.into_boxed_slice()
    }

    pub(crate) fn word(&self, key: &[u32]) -> Word {
        let vertices = key.iter().step_by(2).map(|&v| self.id(v as usize).clone()).collect();
        let letters = key.iter().skip(1).step_by(2).map(|&c| code_letter(c)).collect();
        Word::new(vertices, letters).expect("keys alternate vertices and letters")
    }

    pub(crate) fn two_shape(&self, key: (&[u32], &[u32])) -> TwoShape {
        TwoShape(self.word(key.0), self.word(key.1))
    }

    pub(crate) fn two_link(&self, key: (&[u32], &[u32])) -> TwoLink {
        TwoLink(self.word(key.0), self.word(key.1))
    }
}
