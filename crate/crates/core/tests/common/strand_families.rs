use std::collections::{BTreeMap, BTreeSet};

use edray_core::extraction::{Crossing, Strand};
use edray_core::graph::{EdgeId, VertexId};
use edray_core::shapes::{enumerate_allowed_links, enumerate_shapes, Letter, ShapeWord, Word};
use rand::seq::SliceRandom;
use rand::Rng;

/// A ladder-style strand: separators `x:s:q` (`q < k`) for `s = 0..=len`,
/// a random nonempty shape on each, and between consecutive separators a
/// random allowed link whose m-segments are realised as fresh paths.
pub struct SyntheticStrand {
    pub strand: Strand,
    pub shapes: Vec<ShapeWord>,
    pub links: Vec<Word>,
}

pub struct ShapeCache {
    shapes: BTreeMap<usize, Vec<ShapeWord>>,
}

fn relabel(w: &Word, s: usize) -> Word {
    let vs = w
        .vertices()
        .iter()
        .map(|v| VertexId::new(format!("x:{s}:{}", v.as_str())))
        .collect();
    Word::new(vs, w.letters().to_vec()).unwrap()
}

impl ShapeCache {
    pub fn new() -> Self {
        ShapeCache { shapes: BTreeMap::new() }
    }

    fn shapes(&mut self, k: usize) -> &[ShapeWord] {
        self.shapes.entry(k).or_insert_with(|| {
            let x: Vec<VertexId> = (0..k).map(|q| VertexId::new(q.to_string())).collect();
            enumerate_shapes(&x).unwrap().into_iter().filter(|w| !w.is_empty()).collect()
        })
    }

    /// Draws a chain with `len` pieces; retries shape pairs without allowed links.
    pub fn draw<R: Rng>(&mut self, rng: &mut R, k: usize, len: usize) -> SyntheticStrand {
        let mut shapes = vec![relabel(self.shapes(k).choose(rng).unwrap(), 0)];
        let mut links = Vec::new();
        while links.len() < len {
            let s = links.len() + 1;
            let next = relabel(self.shapes(k).choose(rng).unwrap(), s);
            let options = enumerate_allowed_links(&shapes[s - 1], &next);
            if let Some(tau) = options.choose(rng) {
                links.push(tau.clone());
                shapes.push(next);
            }
        }
        let mut pieces = Vec::new();
        for (s, tau) in links.iter().enumerate() {
            let mut piece = Vec::new();
            for (c, (u, v)) in tau.pairs(Letter::M).into_iter().enumerate() {
                let inner = rng.gen_range(0..3);
                let mut path = vec![u];
                path.extend((0..inner).map(|z| VertexId::new(format!("m:{s}:{c}:{z}"))));
                path.push(v);
                piece.extend(path.windows(2).map(|w| EdgeId::new(w[0].clone(), w[1].clone()).unwrap()));
            }
            pieces.push(piece);
        }
        let crossings = shapes
            .iter()
            .enumerate()
            .map(|(s, w)| Crossing {
                separator: (0..k).map(|q| VertexId::new(format!("x:{s}:{q}"))).collect(),
                shape: w.clone(),
            })
            .collect();
        SyntheticStrand {
            strand: Strand::from_parts(1, 0, crossings, pieces).unwrap(),
            shapes,
            links,
        }
    }
}

pub fn degrees(s: &Strand) -> BTreeMap<VertexId, usize> {
    let mut d = BTreeMap::new();
    for e in s.pieces.iter().flatten() {
        let (u, v) = e.endpoints();
        *d.entry(u.clone()).or_insert(0) += 1;
        *d.entry(v.clone()).or_insert(0) += 1;
    }
    d
}

/// `(#lvr, #rvl)` in `l w r`, read off the letters.
pub fn word_counts(w: &ShapeWord) -> (usize, usize) {
    let mut frame = vec![Letter::L];
    frame.extend(w.letters());
    frame.push(Letter::R);
    let lvr = frame.windows(2).filter(|p| p[0] == Letter::L && p[1] == Letter::R).count();
    let rvl = frame.windows(2).filter(|p| p[0] == Letter::R && p[1] == Letter::L).count();
    (lvr, rvl)
}

/// Degree and word-count conditions of a synthetic strand, recomputed from
/// its pieces and letters alone.
pub fn lemma_violations(fam: &SyntheticStrand) -> Vec<String> {
    let s = &fam.strand;
    let deg = degrees(s);
    let ends: BTreeSet<&VertexId> = s.start().separator.iter().chain(&s.frontier().separator).collect();
    let mut out = Vec::new();
    if let Some((v, d)) = deg.iter().find(|(_, &d)| d > 2) {
        out.push(format!("{v} has degree {d}"));
    }
    let ones: Vec<&VertexId> = deg.iter().filter(|(_, &d)| d == 1).map(|(v, _)| v).collect();
    if let Some(v) = ones.iter().find(|v| !ends.contains(*v)) {
        out.push(format!("inner vertex {v} has degree one"));
    }
    let start_ones = ones.iter().filter(|v| s.start().separator.contains(v)).count();
    let (lvr, rvl) = word_counts(&fam.shapes[0]);
    if lvr != rvl + 1 {
        out.push(format!("{}: #lvr {lvr} against #rvl {rvl}", fam.shapes[0]));
    }
    if start_ones != lvr + rvl {
        out.push(format!("{start_ones} degree-one start vertices against {} word occurrences", lvr + rvl));
    }
    if start_ones % 2 == 0 {
        out.push(format!("even number {start_ones} of degree-one start vertices"));
    }
    out
}
